#pragma once

#include "roughmf/drivers.hpp"
#include "roughmf/rde.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace roughmf {

// Interaction kernel sigma(y, y'). The drift felt at y under a measure mu is
// the integral of sigma(y, .) against the time-t marginal of mu.
struct DriftKernel {
  std::function<void(const Vec& y, const Vec& partner, Vec& out)> sigma;

  // Kernels of the form sigma(y, y') = offset(y) + gain(y) y' integrate
  // against a measure through its first moment only.
  struct Affine {
    std::function<void(const Vec& y, Vec& out)> offset;
    std::function<void(const Vec& y, Mat& out)> gain;
  };
  std::optional<Affine> affine;
  bool is_zero = false;
};

DriftKernel zero_kernel();
// sigma(y, y') = a (y' - y).
DriftKernel linear_attraction_kernel(double a);
// sigma(y, y') = a (y' - y) / sqrt(1 + |y' - y|^2 / r^2): bounded and
// Lipschitz smoothing of an attraction.
DriftKernel smooth_attraction_kernel(double a, double r);

// Weighted family of solution trajectories on one grid.
struct EmpiricalPathMeasure {
  std::vector<double> weights;
  std::vector<SolutionPath> atoms;

  std::size_t size() const { return atoms.size(); }
  const std::vector<double>& times() const { return atoms.front().times; }
  // Weighted mean state at grid index k (fixed summation order).
  Vec mean(std::size_t k) const;
  void validate() const;
};

struct EnsembleMember {
  Vec y0;
  RoughPathGrid driver;
};

// Pairs (y0_i, driver_i) with weights: a sample of u0 x nu.
struct Ensemble {
  std::vector<double> weights;
  std::vector<EnsembleMember> members;

  std::size_t size() const { return members.size(); }
  void validate() const;
};

// Initial law u0 = N(mean, std^2 I).
struct InitialLaw {
  Vec mean;
  double std = 0.0;
};

Vec sample_initial(const InitialLaw& u0, std::uint64_t seed,
                   std::uint64_t index);

// Members 0..m-1 with equal weights, individual i using driver index i and
// initial-state index i.
Ensemble make_ensemble(const PreferenceSpec& spec, const InitialLaw& u0,
                       std::size_t m);
Ensemble make_ensemble(const PreferenceSpec& spec, const InitialLaw& u0,
                       std::span<const std::uint64_t> ids);

// b(t_k, y) = sum_j w_j sigma(y, Y_j(t_k)).
class OccupationDrift {
 public:
  OccupationDrift(const EmpiricalPathMeasure& mu, const DriftKernel& kernel);

  void operator()(std::size_t step, double t, const Vec& y, Vec& out) const;
  Drift as_drift() const;

 private:
  const EmpiricalPathMeasure& mu_;
  const DriftKernel& kernel_;
  std::vector<Vec> means_;  // affine kernels only
};

// Psi: solves every member against the drift induced by mu.
EmpiricalPathMeasure apply_psi(const EmpiricalPathMeasure& mu,
                               const Ensemble& ensemble,
                               const VectorFieldSet& vf,
                               const DriftKernel& kernel);

// Solutions with the interaction switched off.
EmpiricalPathMeasure interaction_free(const Ensemble& ensemble,
                                      const VectorFieldSet& vf);

struct FixedPointOptions {
  double tol = 1e-6;
  int max_iter = 50;
  double p = 2.5;
  std::optional<EmpiricalPathMeasure> initial;  // default: interaction-free
};

struct FixedPointReport {
  int iterations = 0;
  std::vector<double> distances;  // D_k = dist(mu_k, mu_{k-1}), k = 1..
  std::vector<double> ratios;     // D_{k+1} / D_k
  EmpiricalPathMeasure measure;
  bool converged = false;
};

FixedPointReport fixed_point(const Ensemble& ensemble, const VectorFieldSet& vf,
                             const DriftKernel& kernel,
                             const FixedPointOptions& options = {});

// Degenerate start: every atom equal to `source` (weights kept).
EmpiricalPathMeasure single_trajectory_measure(const SolutionPath& source,
                                               const std::vector<double>& weights);

enum class CouplingMode { kSameIndex, kAssignment };

inline constexpr std::size_t kMaxAssignmentAtoms = 512;

// Pathwise distance between trajectories: |a_0 - b_0| + rho_p_var of lifts.
double path_distance(const SolutionPath& a, const SolutionPath& b, double p);

double wasserstein(const EmpiricalPathMeasure& a, const EmpiricalPathMeasure& b,
                   CouplingMode mode, double p);

// Exact W1 between the time-k marginals with Euclidean cost (equal weights).
double marginal_wasserstein(const EmpiricalPathMeasure& a,
                            const EmpiricalPathMeasure& b, std::size_t k);

// Finite-support route: one RDE in R^{N e} driven by a joint lift of the
// support paths, projected back to N trajectories.
EmpiricalPathMeasure solve_finite_support(const DiscretePreferenceMeasure& nu,
                                          const std::vector<Vec>& u0_samples,
                                          const VectorFieldSet& vf,
                                          const DriftKernel& kernel,
                                          JointLiftPolicy policy);

inline constexpr std::size_t kMaxSupportPaths = 64;
inline constexpr int kMaxJointStateDim = 4096;

struct MgfRow {
  double theta = 0.0;
  double estimate = 0.0;
  double std_error = 0.0;
  double max_share = 0.0;  // largest single term / sum of terms
  bool heavy_tail = false;
};

// Monte-Carlo E[exp(theta M_alpha)] over sampled drivers 0..samples-1.
std::vector<MgfRow> mgf_diagnostic(const PreferenceSpec& spec,
                                   const std::vector<double>& thetas,
                                   double alpha, std::size_t samples,
                                   std::uint64_t first_index = 0);

// Checkpoint CSV: header line, then one row per (atom, grid index):
//   atom,weight,k,t,y1..ye[,l11..lee]
// The lift columns are present when every atom carries a lift.
void save_ensemble_csv(const EmpiricalPathMeasure& mu, const std::string& file);
EmpiricalPathMeasure load_ensemble_csv(const std::string& file);

}  // namespace roughmf
