#include "roughmf/chaos_lab.hpp"

#include "roughmf/error.hpp"
#include "roughmf/fields.hpp"
#include "roughmf/parallel.hpp"
#include "roughmf/path_metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

namespace roughmf {

EmpiricalPathMeasure simulate_particle_system(const Scenario& sc,
                                              std::span<const std::uint64_t> ids,
                                              std::uint64_t seed) {
  const std::size_t n = ids.size();
  if (n == 0) throw InvalidInput("simulate_particle_system: need N >= 1");
  PreferenceSpec spec = sc.spec;
  spec.seed = seed;
  const int e = sc.vf.state_dim;

  std::vector<RoughPathGrid> drivers(n);
  EmpiricalPathMeasure out;
  out.weights.assign(n, 1.0 / static_cast<double>(n));
  out.atoms.resize(n);
  parallel_for(n, [&](std::size_t i) {
    drivers[i] = sample_driver(spec, ids[i]);
    SolutionPath& s = out.atoms[i];
    s.times = drivers[i].times();
    s.states.resize(static_cast<Eigen::Index>(s.times.size()), e);
    s.states.row(0) = sample_initial(sc.u0, seed, ids[i]).transpose();
    s.lift.emplace(s.times, e, 2);
    s.lift->p_hint = drivers[i].p_hint;
  });

  // Summation order for the interaction: ascending individual id.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return ids[a] < ids[b]; });

  const std::vector<double>& times = drivers.front().times();
  const double w = 1.0 / static_cast<double>(n);
  std::vector<Vec> y(n), y_next(n);
  std::vector<Mat> running(n, Mat::Zero(e, e));
  for (std::size_t i = 0; i < n; ++i) y[i] = out.atoms[i].y0();
  const std::vector<Vec> y_start = y;

  for (std::size_t k = 0; k + 1 < times.size(); ++k) {
    const double t = times[k];
    const double dt = times[k + 1] - t;
    Vec mean;
    if (sc.kernel.affine && !sc.kernel.is_zero) {
      mean = Vec::Zero(e);
      for (std::size_t j : order) mean.noalias() += w * y[j];
    }
    parallel_for(n, [&](std::size_t i) {
      Vec b = Vec::Zero(e);
      if (!sc.kernel.is_zero) {
        if (sc.kernel.affine) {
          Mat gain;
          sc.kernel.affine->offset(y[i], b);
          sc.kernel.affine->gain(y[i], gain);
          b.noalias() += gain * mean;
        } else {
          Vec tmp(e);
          for (std::size_t j : order) {
            sc.kernel.sigma(y[i], y[j], tmp);
            b.noalias() += w * tmp;
          }
        }
      }
      Vec x1;
      Mat x2, lift_inc(e, e);
      driver_increment(drivers[i], k, x1, x2);
      DavieStepper stepper(sc.vf);
      y_next[i].resize(e);
      stepper.step(y[i], b, dt, x1, x2, y_next[i], &lift_inc);
      try {
        detail::check_state(y_next[i], k);
      } catch (const Divergence& err) {
        std::ostringstream os;
        os << "particle " << i << ": " << err.what();
        throw Divergence(os.str(), k, i);
      }
      detail::extend_lift(*out.atoms[i].lift, running[i], k, y_start[i], y[i],
                          y_next[i], lift_inc);
      out.atoms[i].states.row(static_cast<Eigen::Index>(k + 1)) =
          y_next[i].transpose();
    });
    std::swap(y, y_next);
  }
  return out;
}

EmpiricalPathMeasure simulate_particle_system(const Scenario& sc, std::size_t n,
                                              std::uint64_t seed) {
  std::vector<std::uint64_t> ids(n);
  std::iota(ids.begin(), ids.end(), std::uint64_t{0});
  return simulate_particle_system(sc, ids, seed);
}

std::uint64_t chaos_cell_seed(std::uint64_t base_seed, std::size_t n,
                              int repeat) {
  return mix_seed(base_seed, (static_cast<std::uint64_t>(n) << 20) ^
                                 static_cast<std::uint64_t>(repeat),
                  6);
}

namespace {

EmpiricalPathMeasure subsample(const EmpiricalPathMeasure& ref, std::size_t n,
                               std::uint64_t seed) {
  std::vector<std::size_t> idx(ref.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  auto rng = make_rng(seed, 0, RngStream::kSubsample);
  // Partial Fisher-Yates.
  for (std::size_t i = 0; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  EmpiricalPathMeasure out;
  out.weights.assign(n, 1.0 / static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) out.atoms.push_back(ref.atoms[idx[i]]);
  return out;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size();
  return m % 2 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
}

}  // namespace

ChaosSweepResult chaos_sweep(const Scenario& sc, const std::vector<std::size_t>& ns,
                             const EmpiricalPathMeasure& reference,
                             const ChaosSweepOptions& options) {
  reference.validate();
  if (options.repeats < 1) throw InvalidInput("chaos_sweep: repeats must be >= 1");
  const std::vector<double> grid = uniform_times(sc.spec.grid_size, sc.spec.horizon);
  if (reference.times() != grid)
    throw InvalidInput("chaos_sweep: reference grid does not match the scenario");
  std::vector<std::size_t> sorted_ns = ns;
  std::sort(sorted_ns.begin(), sorted_ns.end());
  for (std::size_t n : sorted_ns)
    if (n == 0 || n > reference.size())
      throw InvalidInput("chaos_sweep: each N must lie in [1, reference size]");

  ChaosSweepResult result;
  for (std::size_t n : sorted_ns)
    for (int r = 0; r < options.repeats; ++r) {
      ChaosRow row;
      row.n = n;
      row.repeat = r;
      row.seed = options.fixed_seed ? *options.fixed_seed
                                    : chaos_cell_seed(options.base_seed, n, r);
      result.rows.push_back(row);
    }
  const std::size_t last_k = grid.size() - 1;
  parallel_for(result.rows.size(), [&](std::size_t c) {
    ChaosRow& row = result.rows[c];
    const auto start = std::chrono::steady_clock::now();
    const EmpiricalPathMeasure system = simulate_particle_system(sc, row.n, row.seed);
    const EmpiricalPathMeasure ref = subsample(reference, row.n, row.seed);
    row.w_marginal = marginal_wasserstein(system, ref, last_k);
    if (row.n <= options.pathwise_max_n)
      row.w_pathwise = wasserstein(system, ref, CouplingMode::kAssignment, sc.p);
    row.seconds = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - start)
                      .count();
  });
  return result;
}

std::vector<std::pair<std::size_t, double>> median_by_n(const ChaosSweepResult& r) {
  std::vector<std::pair<std::size_t, double>> out;
  std::size_t i = 0;
  while (i < r.rows.size()) {
    std::size_t j = i;
    std::vector<double> vals;
    while (j < r.rows.size() && r.rows[j].n == r.rows[i].n)
      vals.push_back(r.rows[j++].w_marginal);
    out.emplace_back(r.rows[i].n, median(vals));
    i = j;
  }
  return out;
}

double log_log_slope(const std::vector<std::pair<std::size_t, double>>& medians) {
  if (medians.size() < 2) throw InvalidInput("log_log_slope: need two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(medians.size());
  for (const auto& [n, w] : medians) {
    const double x = std::log(static_cast<double>(n));
    const double y = std::log(w);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

void write_chaos_csv(const ChaosSweepResult& r, const std::string& file) {
  std::ofstream out(file);
  if (!out) throw IoError("cannot write '" + file + "'");
  out << "N,repeat,seed,w_marginal,w_pathwise,seconds\n" << std::setprecision(17);
  for (const ChaosRow& row : r.rows) {
    out << row.n << "," << row.repeat << "," << row.seed << "," << row.w_marginal
        << ",";
    if (row.w_pathwise) out << *row.w_pathwise;
    out << "," << std::setprecision(6) << row.seconds << std::setprecision(17)
        << "\n";
  }
  if (!out) throw IoError("failed writing '" + file + "'");
}

NuPerturbation nu_continuity_experiment(const Scenario& base,
                                        const std::vector<double>& eps_list,
                                        std::size_t ensemble_size,
                                        const FixedPointOptions& options) {
  for (double eps : eps_list)
    if (!(eps >= 0.0)) throw InvalidInput("nu_continuity: eps must be >= 0");
  auto solve_at = [&](double eps, bool& converged) {
    PreferenceSpec spec = base.spec;
    spec.volatility.scale *= 1.0 + eps;
    const Ensemble ens = make_ensemble(spec, base.u0, ensemble_size);
    FixedPointReport rep = fixed_point(ens, base.vf, base.kernel, options);
    converged = converged && rep.converged;
    return std::move(rep.measure);
  };
  NuPerturbation out;
  const EmpiricalPathMeasure reference = solve_at(0.0, out.converged);
  for (double eps : eps_list) {
    NuPerturbationRow row;
    row.eps = eps;
    if (eps == 0.0) {
      row.distance = wasserstein(reference, reference, CouplingMode::kSameIndex, base.p);
    } else {
      const EmpiricalPathMeasure mu = solve_at(eps, out.converged);
      row.distance = wasserstein(mu, reference, CouplingMode::kSameIndex, base.p);
    }
    out.rows.push_back(row);
  }
  // Trend: ordering rows by decreasing eps, distances must strictly decrease.
  std::vector<NuPerturbationRow> sorted = out.rows;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.eps > b.eps; });
  out.decreasing_as_eps_shrinks = true;
  for (std::size_t i = 1; i < sorted.size(); ++i)
    if (!(sorted[i].distance < sorted[i - 1].distance))
      out.decreasing_as_eps_shrinks = false;
  return out;
}

void write_nu_csv(const NuPerturbation& r, const std::string& file) {
  std::ofstream out(file);
  if (!out) throw IoError("cannot write '" + file + "'");
  out << "eps,distance\n" << std::setprecision(17);
  for (const auto& row : r.rows) out << row.eps << "," << row.distance << "\n";
  if (!out) throw IoError("failed writing '" + file + "'");
}

bool StructureReport::all_pass() const {
  return std::all_of(lines.begin(), lines.end(),
                     [](const CheckLine& l) { return l.pass; });
}

double extension_defect(const Scenario& sc, int n, std::uint64_t seed) {
  PreferenceSpec spec = sc.spec;
  spec.seed = seed;
  std::vector<RoughPathGrid> paths;
  std::vector<Vec> starts;
  std::vector<double> weights;
  auto rng = make_rng(seed, 0, RngStream::kWeights);
  std::uniform_real_distribution<double> unif(0.5, 1.5);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    paths.push_back(sample_driver(spec, static_cast<std::uint64_t>(i)));
    starts.push_back(sample_initial(sc.u0, seed, static_cast<std::uint64_t>(i)));
    weights.push_back(unif(rng));
    total += weights.back();
  }
  for (double& w : weights) w /= total;
  // Renormalize the last weight so the sum is 1 to rounding.
  double head = 0.0;
  for (int i = 0; i + 1 < n; ++i) head += weights[i];
  weights.back() = 1.0 - head;
  const DiscretePreferenceMeasure nu = discrete_measure(weights, paths);
  const EmpiricalPathMeasure a = solve_finite_support(
      nu, starts, sc.vf, sc.kernel, JointLiftPolicy::kZeroCrossArea);
  const EmpiricalPathMeasure b = solve_finite_support(
      nu, starts, sc.vf, sc.kernel, JointLiftPolicy::kJointPiecewiseLinear);
  double worst = 0.0;
  for (int i = 0; i < n; ++i)
    worst = std::max(worst, (a.atoms[i].states - b.atoms[i].states).cwiseAbs().maxCoeff());
  return worst;
}

StructureReport structure_checks(const Scenario& sc,
                                 const StructureCheckOptions& options) {
  StructureReport report;
  auto add = [&](std::string name, double value, double threshold,
                 std::string relation) {
    CheckLine line{std::move(name), value, threshold, relation, true};
    if (relation == "<=") line.pass = value <= threshold;
    if (relation == ">=") line.pass = value >= threshold;
    report.lines.push_back(std::move(line));
  };

  const int e = sc.vf.state_dim;
  const int d = sc.vf.num_fields;
  auto rng = make_rng(sc.spec.seed, 0, RngStream::kProbe);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  std::vector<Vec> probes;
  for (int k = 0; k < options.probes; ++k) {
    Vec y(2 * e);
    for (int c = 0; c < 2 * e; ++c) y(c) = unif(rng);
    probes.push_back(std::move(y));
  }

  std::vector<Vec> single;
  for (const Vec& y : probes) single.push_back(y.head(e));
  add("jacobian_residual", jacobian_residual(sc.vf, single), 1e-5, "<=");

  const VectorFieldSet pair = block_fields(sc.vf, 2);
  double cross = 0.0, same = 0.0;
  for (const Vec& y : probes) {
    for (int p = 0; p < 2 * d; ++p) {
      for (int q = 0; q < 2 * d; ++q) {
        if (p == q) continue;
        const double v = lie_bracket_fd(pair, p, q, y).norm();
        if (p / d != q / d) {
          cross = std::max(cross, v);
        } else {
          same = std::max(same, v);
        }
      }
    }
  }
  add("cross_block_bracket_max", cross, options.bracket_tol, "<=");
  // The same-block bracket must be visibly nonzero, otherwise the cross-block
  // check could not fail.
  if (d > 1) add("same_block_bracket_max", same, 1e-3, ">=");

  for (int n : options.particle_counts) {
    double worst = 0.0;
    for (int s = 0; s < options.seeds; ++s)
      worst = std::max(worst, extension_defect(sc, n, sc.spec.seed + 101 + s));
    add("extension_defect_n" + std::to_string(n), worst, options.policy_tol, "<=");
  }

  std::vector<ControlTable> tables;
  std::vector<RoughPathGrid> lifts;
  tables.reserve(options.bound_samples);
  for (int i = 0; i < options.bound_samples; ++i) {
    lifts.push_back(sample_driver(sc.spec, static_cast<std::uint64_t>(i)));
    tables.push_back(build_control_table(lifts.back(), sc.p));
  }
  double superadd = 0.0;
  for (const ControlTable& t : tables) {
    const std::size_t n = t.size();
    for (std::size_t i = 0; i < n; i += 7)
      for (std::size_t k = i + 1; k < n; k += 5)
        for (std::size_t j = k + 1; j < n; j += 3) {
          const double gap = t(i, k) + t(k, j) - t(i, j);
          superadd = std::max(superadd, gap / std::max(1.0, t(i, j)));
        }
  }
  add("control_superadditivity_violation", superadd, 1e-12, "<=");
  for (double alpha : options.alphas) {
    int held = 0;
    for (const ControlTable& t : tables)
      if (pvar_bound_check(t, alpha).holds) ++held;
    std::ostringstream name;
    name << "pvar_bound_alpha_" << alpha << "_held";
    add(name.str(), held, options.bound_samples, ">=");
  }

  if (lifts.size() >= 2) {
    // rho_{p-omega} of two drivers relative to the control of the first.
    add("rho_p_omega_diagnostic", rho_p_omega(lifts[0], lifts[1], sc.p, tables[0]),
        0.0, "info");
  }
  return report;
}

void write_structure_report(const StructureReport& r, const std::string& file) {
  std::ofstream out(file);
  if (!out) throw IoError("cannot write '" + file + "'");
  out << "check\tvalue\tthreshold\trelation\tstatus\n" << std::setprecision(6);
  for (const CheckLine& l : r.lines) {
    out << l.name << "\t" << l.value << "\t" << l.threshold << "\t" << l.relation
        << "\t" << (l.relation == "info" ? "INFO" : (l.pass ? "PASS" : "FAIL"))
        << "\n";
  }
  out << "overall\t" << (r.all_pass() ? "PASS" : "FAIL") << "\n";
  if (!out) throw IoError("failed writing '" + file + "'");
}

}  // namespace roughmf
