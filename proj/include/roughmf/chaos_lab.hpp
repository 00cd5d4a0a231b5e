#pragma once

#include "roughmf/mean_field.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace roughmf {

// A fully specified interacting-population scenario.
struct Scenario {
  PreferenceSpec spec;
  InitialLaw u0;
  VectorFieldSet vf;
  DriftKernel kernel;
  double p = 2.5;
};

// Coupled N-particle system with equal weights. Particle i uses individual id
// ids[i] for both its driver and its initial state; the interaction sum at
// every step runs in ascending id order, so permuting ids permutes the output
// trajectories exactly.
EmpiricalPathMeasure simulate_particle_system(const Scenario& sc,
                                              std::span<const std::uint64_t> ids,
                                              std::uint64_t seed);
EmpiricalPathMeasure simulate_particle_system(const Scenario& sc, std::size_t n,
                                              std::uint64_t seed);

struct ChaosRow {
  std::size_t n = 0;
  int repeat = 0;
  std::uint64_t seed = 0;
  double w_marginal = 0.0;
  std::optional<double> w_pathwise;  // only for n <= pathwise_max_n
  double seconds = 0.0;
};

struct ChaosSweepOptions {
  int repeats = 20;
  std::size_t pathwise_max_n = 128;
  std::uint64_t base_seed = 1;
  std::optional<std::uint64_t> fixed_seed;  // every cell uses this seed
};

struct ChaosSweepResult {
  std::vector<ChaosRow> rows;  // sorted by (n, repeat)
};

// Seed used for cell (n, repeat) unless a fixed seed is given.
std::uint64_t chaos_cell_seed(std::uint64_t base_seed, std::size_t n,
                              int repeat);

ChaosSweepResult chaos_sweep(const Scenario& sc, const std::vector<std::size_t>& ns,
                             const EmpiricalPathMeasure& reference,
                             const ChaosSweepOptions& options);

// Median of w_marginal per n, in ascending n.
std::vector<std::pair<std::size_t, double>> median_by_n(const ChaosSweepResult& r);
// Least-squares slope of log(median) against log(n).
double log_log_slope(const std::vector<std::pair<std::size_t, double>>& medians);

void write_chaos_csv(const ChaosSweepResult& r, const std::string& file);

struct NuPerturbationRow {
  double eps = 0.0;
  double distance = 0.0;
};

struct NuPerturbation {
  std::vector<NuPerturbationRow> rows;  // in the order of eps_list
  bool decreasing_as_eps_shrinks = false;
  bool converged = true;
};

// Fixed points for volatility multipliers (1 + eps) under common randomness;
// distances are same-index path distances to the eps = 0 fixed point.
NuPerturbation nu_continuity_experiment(const Scenario& base,
                                        const std::vector<double>& eps_list,
                                        std::size_t ensemble_size,
                                        const FixedPointOptions& options);

void write_nu_csv(const NuPerturbation& r, const std::string& file);

struct CheckLine {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  std::string relation;  // "<=", ">=" or "info"
  bool pass = true;
};

struct StructureReport {
  std::vector<CheckLine> lines;
  bool all_pass() const;
};

struct StructureCheckOptions {
  int probes = 100;
  int seeds = 10;
  std::vector<int> particle_counts = {2, 4};
  double bracket_tol = 1e-8;
  double policy_tol = 1e-10;
  std::vector<double> alphas = {0.5, 1.0, 2.0};
  int bound_samples = 100;
};

StructureReport structure_checks(const Scenario& sc,
                                 const StructureCheckOptions& options = {});

// Max over seeds of the sup defect between projected trajectories of the two
// lift policies for an n-particle finite-support solve.
double extension_defect(const Scenario& sc, int n, std::uint64_t seed);

void write_structure_report(const StructureReport& r, const std::string& file);

}  // namespace roughmf
