#pragma once

#include "roughmf/rough_path.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace roughmf {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                             Eigen::RowMajor>;

// Driving vector fields V = (V^1, ..., V^d) on R^e with first derivatives.
struct VectorFieldSet {
  int num_fields = 0;  // d
  int state_dim = 0;   // e
  // out is e x d; column i holds V^i(y).
  std::function<void(const Vec& y, Mat& out)> eval;
  // out[i] is the e x e Jacobian DV^i(y).
  std::function<void(const Vec& y, std::vector<Mat>& out)> jac;
  std::optional<double> lip_gamma_bound;
};

// Worst relative mismatch between `jac` and central finite differences of
// `eval` over the probes.
double jacobian_residual(const VectorFieldSet& vf, std::span<const Vec> probes);

// Checks the Jacobian against finite differences of eval at deterministic
// probes and throws InvalidInput above 1e-5 relative mismatch.
VectorFieldSet register_fields(VectorFieldSet vf, std::uint64_t probe_seed = 7,
                               int probes = 16, double probe_scale = 2.0);

// [V^p, V^q](y) = DV^q(y) V^p(y) - DV^p(y) V^q(y), with both directional
// derivatives taken by central finite differences of eval.
Vec lie_bracket_fd(const VectorFieldSet& vf, int p, int q, const Vec& y,
                   double h = 1e-5);

// Drift b(t_k, y). `step` is the index of the left grid point.
using Drift =
    std::function<void(std::size_t step, double t, const Vec& y, Vec& out)>;

Drift zero_drift();
Drift constant_drift(Vec c);

// States y(t_k) in rows plus the optional level-2 lift of the solution
// (based at the identity; its lvl1 equals y(t_k) - y(t_0)).
struct SolutionPath {
  std::vector<double> times;
  RowMat states;
  std::optional<RoughPathGrid> lift;

  std::size_t size() const { return times.size(); }
  int state_dim() const { return static_cast<int>(states.cols()); }
  Vec y(std::size_t k) const {
    return states.row(static_cast<Eigen::Index>(k)).transpose();
  }
  Vec y0() const { return y(0); }

  // The stored lift, or the piecewise-linear lift of the states.
  RoughPathGrid to_rough_path() const;
};

// One step-2 Euler (Davie) step per grid interval:
//   y' = y + b dt + V(y) x1 + sum_{i,j} DV^j(y) V^i(y) x2(i, j)
// and, for the lift, the local level-2 increment V(y) x2 V(y)^T.
class DavieStepper {
 public:
  explicit DavieStepper(const VectorFieldSet& vf);

  // Writes y_next; if lift_inc is non-null it receives V x2 V^T.
  void step(const Vec& y, const Vec& drift, double dt, const Vec& x1,
            const Mat& x2, Vec& y_next, Mat* lift_inc);

 private:
  const VectorFieldSet& vf_;
  Mat v_;
  std::vector<Mat> jac_;
  Vec u_;
};

// Driver increment of step k -> k+1 as (x1, x2).
void driver_increment(const RoughPathGrid& driver, std::size_t k, Vec& x1,
                      Mat& x2);

inline constexpr double kBlowUpBound = 1e12;

namespace detail {
// Throws Divergence if y_next is non-finite or exceeds kBlowUpBound.
void check_state(const Vec& y_next, std::size_t step);
// Chen update of a solution lift from step k to k + 1.
void extend_lift(RoughPathGrid& lift, Mat& running2, std::size_t k,
                 const Vec& y0, const Vec& y, const Vec& y_next,
                 const Mat& lift_inc);
}  // namespace detail

SolutionPath solve_rde(const VectorFieldSet& vf, const Drift& drift,
                       const RoughPathGrid& driver, const Vec& y0,
                       bool want_lift);

enum class Refinement {
  // `driver` is the fine grid; the coarse run uses every other point.
  kSubsampleFine,
  // `driver` is the coarse grid; the fine run inserts level-1 midpoints and
  // uses the piecewise-linear (geometric) lift.
  kLinearMidpoint,
};

struct ErrorEstimate {
  SolutionPath solution;  // the finer of the two runs
  double err = 0.0;       // sup over coarse grid times of |y_coarse - y_fine|
};

// The drift is evaluated with the step index of whichever grid is being
// solved, so it should depend on (t, y) only.
ErrorEstimate estimate_error(const VectorFieldSet& vf, const Drift& drift,
                             const RoughPathGrid& driver, const Vec& y0,
                             bool want_lift, Refinement refinement);

RoughPathGrid refine_linear_midpoint(const RoughPathGrid& driver);

// Path run backwards in time: values x_T^{-1} (x) x_{T - t}, on the mirrored
// grid.
RoughPathGrid reversed(const RoughPathGrid& driver);

}  // namespace roughmf
