#include "roughmf/config.hpp"

#include "roughmf/error.hpp"
#include "roughmf/path_metrics.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <sstream>

namespace roughmf {

namespace {

namespace fs = std::filesystem;

std::ofstream open_out(const fs::path& file) {
  std::ofstream out(file);
  if (!out) throw IoError("cannot write '" + file.string() + "'");
  out << std::setprecision(17);
  return out;
}

void write_rough_path_csv(const RoughPathGrid& g, const fs::path& file) {
  auto out = open_out(file);
  const int d = g.dim();
  out << "k,t";
  for (int i = 1; i <= d; ++i) out << ",x" << i;
  if (g.level() == 2)
    for (int i = 1; i <= d; ++i)
      for (int j = 1; j <= d; ++j) out << ",x" << i << "_" << j;
  out << "\n";
  for (std::size_t k = 0; k < g.size(); ++k) {
    out << k << "," << g.times()[k];
    for (double v : g.lvl1(k)) out << "," << v;
    if (g.level() == 2)
      for (double v : g.lvl2(k)) out << "," << v;
    out << "\n";
  }
}

void write_states_csv(const EmpiricalPathMeasure& mu, const fs::path& file) {
  auto out = open_out(file);
  const int e = mu.atoms.front().state_dim();
  out << "atom,k,t";
  for (int i = 1; i <= e; ++i) out << ",y" << i;
  out << "\n";
  for (std::size_t a = 0; a < mu.size(); ++a) {
    const SolutionPath& s = mu.atoms[a];
    for (std::size_t k = 0; k < s.size(); ++k) {
      out << a << "," << k << "," << s.times[k];
      for (int i = 0; i < e; ++i) out << "," << s.states(static_cast<Eigen::Index>(k), i);
      out << "\n";
    }
  }
}

void write_mean_csv(const EmpiricalPathMeasure& mu, const fs::path& file) {
  auto out = open_out(file);
  const int e = mu.atoms.front().state_dim();
  out << "k,t";
  for (int i = 1; i <= e; ++i) out << ",m" << i;
  out << "\n";
  for (std::size_t k = 0; k < mu.times().size(); ++k) {
    out << k << "," << mu.times()[k];
    const Vec m = mu.mean(k);
    for (int i = 0; i < e; ++i) out << "," << m(i);
    out << "\n";
  }
}

void write_text(const fs::path& file, const std::string& text) {
  auto out = open_out(file);
  out << text;
  if (!out) throw IoError("failed writing '" + file.string() + "'");
}

std::size_t as_size(const ExperimentConfig& cfg, const char* key) {
  return static_cast<std::size_t>(cfg.integer(key));
}

// Each command: a validation stage that returns the work to run once the
// output directory exists.
using Work = std::function<std::string(const fs::path&)>;

Work cmd_lift(const ExperimentConfig& cfg) {
  const PreferenceSpec spec = build_spec(cfg);
  const std::uint64_t index = cfg.u64("index");
  return [=](const fs::path& out) {
    const RoughPathGrid g = sample_driver(spec, index);
    write_rough_path_csv(g, out / "driver.csv");
    std::ostringstream os;
    os << "driver " << index << ": " << g.size() << " points, p-variation "
       << p_variation(g, spec.p);
    return os.str();
  };
}

Work cmd_solve(const ExperimentConfig& cfg) {
  const Scenario sc = build_scenario(cfg);
  const std::uint64_t index = cfg.u64("index");
  return [=](const fs::path& out) {
    PreferenceSpec fine_spec = sc.spec;
    fine_spec.grid_size *= 2;
    // The fine driver is sampled at 2G; the G-grid driver is its subsample.
    const RoughPathGrid fine = sample_driver(fine_spec, index);
    const Vec y0 = sample_initial(sc.u0, sc.spec.seed, index);
    const ErrorEstimate est =
        estimate_error(sc.vf, zero_drift(), fine, y0, false, Refinement::kSubsampleFine);
    const SolutionPath sol = solve_rde(sc.vf, zero_drift(), fine.subsample2(), y0, true);
    EmpiricalPathMeasure one;
    one.weights = {1.0};
    one.atoms = {sol};
    write_states_csv(one, out / "solution.csv");
    write_rough_path_csv(*sol.lift, out / "solution_lift.csv");
    std::ostringstream os;
    os << std::setprecision(6) << "solve: y_T = " << sol.y(sol.size() - 1).transpose()
       << ", err estimate (G vs 2G) " << est.err;
    write_text(out / "summary.txt", os.str() + "\n");
    return os.str();
  };
}

Work cmd_fixed_point(const ExperimentConfig& cfg) {
  const Scenario sc = build_scenario(cfg);
  const FixedPointOptions opts = build_fixed_point_options(cfg);
  const std::size_t m = as_size(cfg, "ensemble");
  return [=](const fs::path& out) {
    const Ensemble ens = make_ensemble(sc.spec, sc.u0, m);
    const FixedPointReport rep = fixed_point(ens, sc.vf, sc.kernel, opts);
    {
      auto f = open_out(out / "fixed_point.csv");
      f << "iteration,distance,ratio\n";
      for (std::size_t k = 0; k < rep.distances.size(); ++k) {
        f << k + 1 << "," << rep.distances[k] << ",";
        if (k > 0) f << rep.ratios[k - 1];
        f << "\n";
      }
    }
    write_mean_csv(rep.measure, out / "mean.csv");
    save_ensemble_csv(rep.measure, out / "measure.csv");
    std::ostringstream os;
    os << "fixed point: " << rep.iterations << " iterations, last distance "
       << rep.distances.back() << (rep.converged ? ", converged" : ", NOT converged");
    write_text(out / "summary.txt", os.str() + "\n");
    if (!rep.converged) throw CheckFailed(os.str());
    return os.str();
  };
}

Work cmd_finite(const ExperimentConfig& cfg) {
  const Scenario sc = build_scenario(cfg);
  const FixedPointOptions opts = build_fixed_point_options(cfg);
  const std::size_t n = as_size(cfg, "support_n");
  if (n < 1 || n > kMaxSupportPaths)
    throw InvalidInput("support_n must lie in [1, 64]");
  return [=](const fs::path& out) {
    std::vector<RoughPathGrid> paths;
    std::vector<Vec> starts;
    for (std::size_t i = 0; i < n; ++i) {
      paths.push_back(sample_driver(sc.spec, i));
      starts.push_back(sample_initial(sc.u0, sc.spec.seed, i));
    }
    const DiscretePreferenceMeasure nu =
        discrete_measure(std::vector<double>(n, 1.0 / static_cast<double>(n)), paths);
    const EmpiricalPathMeasure a =
        solve_finite_support(nu, starts, sc.vf, sc.kernel, JointLiftPolicy::kZeroCrossArea);
    const EmpiricalPathMeasure b = solve_finite_support(
        nu, starts, sc.vf, sc.kernel, JointLiftPolicy::kJointPiecewiseLinear);
    double defect = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      defect = std::max(defect, (a.atoms[i].states - b.atoms[i].states).cwiseAbs().maxCoeff());
    // same atoms through Picard
    Ensemble ens;
    ens.weights = nu.weights;
    for (std::size_t i = 0; i < n; ++i) ens.members.push_back({starts[i], paths[i]});
    const FixedPointReport fp = fixed_point(ens, sc.vf, sc.kernel, opts);
    const double route = wasserstein(a, fp.measure, CouplingMode::kSameIndex, sc.p);
    write_states_csv(a, out / "finite.csv");
    std::ostringstream os;
    os << "finite support: N = " << n << ", policy defect " << defect
       << ", distance to Picard fixed point " << route;
    write_text(out / "summary.txt", os.str() + "\n");
    if (!(defect <= 1e-10)) throw CheckFailed(os.str() + " (policy defect above 1e-10)");
    if (!fp.converged) throw CheckFailed(os.str() + " (Picard did not converge)");
    if (!(route <= 1e-4)) throw CheckFailed(os.str() + " (route distance above 1e-4)");
    return os.str();
  };
}

Work cmd_chaos(const ExperimentConfig& cfg) {
  const Scenario sc = build_scenario(cfg);
  const FixedPointOptions opts = build_fixed_point_options(cfg);
  const std::size_t m_ref = as_size(cfg, "m_ref");
  const std::vector<std::size_t> ns = cfg.sizes("ns");
  if (ns.empty()) throw InvalidInput("ns must not be empty");
  for (std::size_t n : ns)
    if (n > m_ref) throw InvalidInput("every N in ns must be <= m_ref");
  ChaosSweepOptions copts;
  copts.repeats = static_cast<int>(cfg.integer("repeats"));
  copts.pathwise_max_n = as_size(cfg, "pathwise_max_n");
  copts.base_seed = cfg.u64("seed");
  return [=](const fs::path& out) {
    const Ensemble ens = make_ensemble(sc.spec, sc.u0, m_ref);
    const FixedPointReport ref = fixed_point(ens, sc.vf, sc.kernel, opts);
    const ChaosSweepResult r = chaos_sweep(sc, ns, ref.measure, copts);
    write_chaos_csv(r, (out / "chaos_sweep.csv").string());
    const auto med = median_by_n(r);
    std::ostringstream os;
    os << std::setprecision(6) << "reference: M_ref = " << m_ref << ", "
       << ref.iterations << " Picard iterations\n";
    for (const auto& [n, w] : med) os << "N = " << n << " median w_marginal " << w << "\n";
    if (med.size() >= 2) os << "log-log slope " << log_log_slope(med) << "\n";
    write_text(out / "summary.txt", os.str());
    if (!ref.converged) throw CheckFailed("reference fixed point did not converge");
    return "chaos sweep: " + std::to_string(r.rows.size()) + " cells";
  };
}

Work cmd_nu_cont(const ExperimentConfig& cfg) {
  const Scenario sc = build_scenario(cfg);
  const FixedPointOptions opts = build_fixed_point_options(cfg);
  const std::vector<double> eps = cfg.reals("eps");
  const std::size_t m = as_size(cfg, "nu_ensemble");
  if (eps.empty()) throw InvalidInput("eps must not be empty");
  if (m < 1) throw InvalidInput("nu_ensemble must be >= 1");
  return [=](const fs::path& out) {
    const NuPerturbation r = nu_continuity_experiment(sc, eps, m, opts);
    write_nu_csv(r, (out / "nu_continuity.csv").string());
    bool zero_ok = true;
    for (const auto& row : r.rows)
      if (row.eps == 0.0 && !(row.distance <= 2.0 * opts.tol)) zero_ok = false;
    std::ostringstream os;
    os << "nu continuity: " << (r.decreasing_as_eps_shrinks ? "decreasing" : "NOT decreasing")
       << ", eps = 0 " << (zero_ok ? "within 2 tol" : "outside 2 tol")
       << (r.converged ? "" : ", some fixed point did not converge");
    write_text(out / "summary.txt", os.str() + "\n");
    if (!r.decreasing_as_eps_shrinks || !zero_ok || !r.converged) throw CheckFailed(os.str());
    return os.str();
  };
}

Work cmd_check(const ExperimentConfig& cfg) {
  const Scenario sc = build_scenario(cfg);
  StructureCheckOptions o;
  o.probes = static_cast<int>(cfg.integer("check_probes"));
  o.seeds = static_cast<int>(cfg.integer("check_seeds"));
  o.particle_counts.clear();
  for (std::size_t n : cfg.sizes("check_particles")) {
    if (n > kMaxSupportPaths) throw InvalidInput("check_particles entries must be <= 64");
    o.particle_counts.push_back(static_cast<int>(n));
  }
  o.alphas = cfg.reals("alphas");
  o.bound_samples = static_cast<int>(cfg.integer("bound_samples"));
  if (sc.spec.grid_size + 1 > kMaxTablePoints)
    throw InvalidInput("check builds control tables: grid must be <= 512");
  return [=](const fs::path& out) {
    const StructureReport r = structure_checks(sc, o);
    write_structure_report(r, (out / "structure_checks.txt").string());
    std::size_t failed = 0;
    for (const auto& l : r.lines)
      if (!l.pass) ++failed;
    const std::string msg = "structure checks: " + std::to_string(r.lines.size()) +
                            " lines, " + std::to_string(failed) + " failed";
    if (failed) throw CheckFailed(msg);
    return msg;
  };
}

Work cmd_mgf(const ExperimentConfig& cfg) {
  const PreferenceSpec spec = build_spec(cfg);
  const std::vector<double> thetas = cfg.reals("thetas");
  const double alpha = cfg.real("mgf_alpha");
  const std::size_t samples = as_size(cfg, "mgf_samples");
  if (samples < 100) throw InvalidInput("mgf_samples must be >= 100");
  if (!(alpha > 0.0)) throw InvalidInput("mgf_alpha must be positive");
  if (spec.grid_size + 1 > kMaxTablePoints)
    throw InvalidInput("mgf builds control tables: grid must be <= 512");
  return [=](const fs::path& out) {
    const auto rows = mgf_diagnostic(spec, thetas, alpha, samples);
    auto f = open_out(out / "mgf.csv");
    f << "theta,estimate,std_error,max_share,heavy_tail\n";
    std::size_t heavy = 0;
    for (const MgfRow& r : rows) {
      f << r.theta << "," << r.estimate << "," << r.std_error << "," << r.max_share << ","
        << (r.heavy_tail ? 1 : 0) << "\n";
      if (r.heavy_tail) ++heavy;
    }
    return "mgf: " + std::to_string(rows.size()) + " thetas, " + std::to_string(heavy) +
           " flagged heavy-tailed";
  };
}

}  // namespace

std::string run_command(const std::string& command, const ExperimentConfig& cfg,
                        const std::string& out_dir) {
  static const std::map<std::string, std::function<Work(const ExperimentConfig&)>> table = {
      {"lift", cmd_lift},         {"solve", cmd_solve},     {"fixed-point", cmd_fixed_point},
      {"finite", cmd_finite},     {"chaos", cmd_chaos},     {"nu-cont", cmd_nu_cont},
      {"check", cmd_check},       {"mgf", cmd_mgf}};
  auto it = table.find(command);
  if (it == table.end()) throw InvalidInput("unknown command '" + command + "'");
  if (out_dir.empty()) throw InvalidInput("output directory must not be empty");
  cfg.validate();
  Work work = it->second(cfg);

  const fs::path out(out_dir);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create '" + out_dir + "': " + ec.message());
  write_text(out / "config.resolved.txt",
             std::string("# ") + version_string() + "\n# command = " + command + "\n" +
                 cfg.dump());
  return work(out);
}

}  // namespace roughmf
