#include "roughmf/mean_field.hpp"

#include "roughmf/assignment.hpp"
#include "roughmf/error.hpp"
#include "roughmf/fields.hpp"
#include "roughmf/parallel.hpp"
#include "roughmf/path_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace roughmf {

namespace {

void check_weights(const std::vector<double>& w, std::size_t n,
                   const char* what) {
  if (w.size() != n || n == 0)
    throw InvalidInput(std::string(what) + ": need one weight per atom");
  double total = 0.0;
  for (double x : w) {
    if (!(x >= 0.0)) throw InvalidInput(std::string(what) + ": negative weight");
    total += x;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw InvalidInput(std::string(what) + ": weights must sum to 1");
}

bool uniform_weights(const std::vector<double>& w) {
  const double ref = 1.0 / static_cast<double>(w.size());
  return std::all_of(w.begin(), w.end(),
                     [&](double x) { return std::abs(x - ref) <= 1e-12; });
}

// Integral of sigma(y, .) against sum_j w_j delta_{partners_j}.
void integrate_kernel(const DriftKernel& kernel, const Vec& y,
                      const std::vector<double>& weights,
                      const std::vector<Vec>& partners, Vec& out) {
  out.setZero(y.size());
  if (kernel.is_zero) return;
  Vec tmp(y.size());
  for (std::size_t j = 0; j < partners.size(); ++j) {
    kernel.sigma(y, partners[j], tmp);
    out.noalias() += weights[j] * tmp;
  }
}

}  // namespace

DriftKernel zero_kernel() {
  DriftKernel k;
  k.sigma = [](const Vec& y, const Vec&, Vec& out) { out.setZero(y.size()); };
  k.affine = DriftKernel::Affine{
      [](const Vec& y, Vec& out) { out.setZero(y.size()); },
      [](const Vec& y, Mat& out) { out.setZero(y.size(), y.size()); }};
  k.is_zero = true;
  return k;
}

DriftKernel linear_attraction_kernel(double a) {
  DriftKernel k;
  k.sigma = [a](const Vec& y, const Vec& partner, Vec& out) {
    out = a * (partner - y);
  };
  k.affine = DriftKernel::Affine{
      [a](const Vec& y, Vec& out) { out = -a * y; },
      [a](const Vec& y, Mat& out) {
        out = a * Mat::Identity(y.size(), y.size());
      }};
  k.is_zero = a == 0.0;
  return k;
}

DriftKernel smooth_attraction_kernel(double a, double r) {
  if (!(r > 0.0)) throw InvalidInput("smooth attraction radius must be > 0");
  DriftKernel k;
  k.sigma = [a, r](const Vec& y, const Vec& partner, Vec& out) {
    const Vec gap = partner - y;
    out = (a / std::sqrt(1.0 + gap.squaredNorm() / (r * r))) * gap;
  };
  k.is_zero = a == 0.0;
  return k;
}

Vec EmpiricalPathMeasure::mean(std::size_t k) const {
  Vec m = Vec::Zero(atoms.front().state_dim());
  for (std::size_t j = 0; j < atoms.size(); ++j)
    m.noalias() +=
        weights[j] * atoms[j].states.row(static_cast<Eigen::Index>(k)).transpose();
  return m;
}

void EmpiricalPathMeasure::validate() const {
  check_weights(weights, atoms.size(), "empirical measure");
  for (const auto& a : atoms) {
    if (a.times != atoms.front().times ||
        a.state_dim() != atoms.front().state_dim())
      throw InvalidInput("empirical measure: atoms must share grid and dim");
  }
}

void Ensemble::validate() const {
  check_weights(weights, members.size(), "ensemble");
  for (const auto& m : members) {
    if (!same_grid(m.driver, members.front().driver) ||
        m.y0.size() != members.front().y0.size())
      throw InvalidInput("ensemble: members must share grid and dimensions");
  }
}

Vec sample_initial(const InitialLaw& u0, std::uint64_t seed,
                   std::uint64_t index) {
  Vec y = u0.mean;
  if (u0.std > 0.0) {
    auto rng = make_rng(seed, index, RngStream::kInitial);
    std::normal_distribution<double> normal;
    for (Eigen::Index c = 0; c < y.size(); ++c) y(c) += u0.std * normal(rng);
  }
  return y;
}

Ensemble make_ensemble(const PreferenceSpec& spec, const InitialLaw& u0,
                       std::span<const std::uint64_t> ids) {
  Ensemble ens;
  ens.members.resize(ids.size());
  ens.weights.assign(ids.size(), 1.0 / static_cast<double>(ids.size()));
  parallel_for(ids.size(), [&](std::size_t i) {
    ens.members[i].driver = sample_driver(spec, ids[i]);
    ens.members[i].y0 = sample_initial(u0, spec.seed, ids[i]);
  });
  return ens;
}

Ensemble make_ensemble(const PreferenceSpec& spec, const InitialLaw& u0,
                       std::size_t m) {
  std::vector<std::uint64_t> ids(m);
  for (std::size_t i = 0; i < m; ++i) ids[i] = i;
  return make_ensemble(spec, u0, ids);
}

OccupationDrift::OccupationDrift(const EmpiricalPathMeasure& mu,
                                 const DriftKernel& kernel)
    : mu_(mu), kernel_(kernel) {
  if (kernel_.affine && !kernel_.is_zero) {
    means_.reserve(mu_.times().size());
    for (std::size_t k = 0; k < mu_.times().size(); ++k)
      means_.push_back(mu_.mean(k));
  }
}

void OccupationDrift::operator()(std::size_t step, double, const Vec& y,
                                 Vec& out) const {
  out.setZero(y.size());
  if (kernel_.is_zero) return;
  if (kernel_.affine) {
    Mat gain;
    kernel_.affine->offset(y, out);
    kernel_.affine->gain(y, gain);
    out.noalias() += gain * means_[step];
    return;
  }
  Vec tmp(y.size()), partner(y.size());
  for (std::size_t j = 0; j < mu_.size(); ++j) {
    partner = mu_.atoms[j].states.row(static_cast<Eigen::Index>(step)).transpose();
    kernel_.sigma(y, partner, tmp);
    out.noalias() += mu_.weights[j] * tmp;
  }
}

Drift OccupationDrift::as_drift() const {
  return [this](std::size_t step, double t, const Vec& y, Vec& out) {
    (*this)(step, t, y, out);
  };
}

EmpiricalPathMeasure apply_psi(const EmpiricalPathMeasure& mu,
                               const Ensemble& ensemble,
                               const VectorFieldSet& vf,
                               const DriftKernel& kernel) {
  ensemble.validate();
  if (mu.times() != ensemble.members.front().driver.times())
    throw InvalidInput("apply_psi: measure and drivers live on different grids");
  const OccupationDrift occupation(mu, kernel);
  const Drift drift = occupation.as_drift();
  EmpiricalPathMeasure out;
  out.weights = ensemble.weights;
  out.atoms.resize(ensemble.size());
  parallel_for(ensemble.size(), [&](std::size_t i) {
    try {
      out.atoms[i] = solve_rde(vf, drift, ensemble.members[i].driver,
                               ensemble.members[i].y0, true);
    } catch (const Divergence& e) {
      std::ostringstream os;
      os << "particle " << i << ": " << e.what();
      throw Divergence(os.str(), e.step(), i);
    }
  });
  return out;
}

EmpiricalPathMeasure interaction_free(const Ensemble& ensemble,
                                      const VectorFieldSet& vf) {
  ensemble.validate();
  const Drift drift = zero_drift();
  EmpiricalPathMeasure out;
  out.weights = ensemble.weights;
  out.atoms.resize(ensemble.size());
  parallel_for(ensemble.size(), [&](std::size_t i) {
    try {
      out.atoms[i] = solve_rde(vf, drift, ensemble.members[i].driver,
                               ensemble.members[i].y0, true);
    } catch (const Divergence& e) {
      std::ostringstream os;
      os << "particle " << i << ": " << e.what();
      throw Divergence(os.str(), e.step(), i);
    }
  });
  return out;
}

EmpiricalPathMeasure single_trajectory_measure(
    const SolutionPath& source, const std::vector<double>& weights) {
  EmpiricalPathMeasure out;
  out.weights = weights;
  out.atoms.assign(weights.size(), source);
  return out;
}

double path_distance(const SolutionPath& a, const SolutionPath& b, double p) {
  const double gap = (a.states.row(0) - b.states.row(0)).norm();
  return rho_p_var(a.to_rough_path(), b.to_rough_path(), p, gap);
}

namespace {

double same_index_distance(const EmpiricalPathMeasure& a,
                           const EmpiricalPathMeasure& b, double p) {
  std::vector<double> terms(a.size());
  parallel_for(a.size(), [&](std::size_t i) {
    terms[i] = path_distance(a.atoms[i], b.atoms[i], p);
  });
  double acc = 0.0;
  for (std::size_t i = 0; i < terms.size(); ++i) acc += a.weights[i] * terms[i];
  return acc;
}

}  // namespace

FixedPointReport fixed_point(const Ensemble& ensemble, const VectorFieldSet& vf,
                             const DriftKernel& kernel,
                             const FixedPointOptions& options) {
  if (!(options.tol > 0.0)) throw InvalidInput("fixed_point: tol must be > 0");
  if (options.max_iter < 1) throw InvalidInput("fixed_point: max_iter must be >= 1");
  FixedPointReport report;
  EmpiricalPathMeasure current =
      options.initial ? *options.initial : interaction_free(ensemble, vf);
  current.validate();
  for (int k = 1; k <= options.max_iter; ++k) {
    EmpiricalPathMeasure next = apply_psi(current, ensemble, vf, kernel);
    const double dist = same_index_distance(next, current, options.p);
    if (!report.distances.empty())
      report.ratios.push_back(report.distances.back() > 0.0
                                  ? dist / report.distances.back()
                                  : 0.0);
    report.distances.push_back(dist);
    report.iterations = k;
    current = std::move(next);
    if (dist <= options.tol) {
      report.converged = true;
      break;
    }
  }
  report.measure = std::move(current);
  return report;
}

double wasserstein(const EmpiricalPathMeasure& a, const EmpiricalPathMeasure& b,
                   CouplingMode mode, double p) {
  a.validate();
  b.validate();
  if (a.times() != b.times())
    throw InvalidInput("wasserstein: measures live on different grids");
  if (mode == CouplingMode::kSameIndex) {
    if (a.size() != b.size())
      throw InvalidInput("wasserstein: same-index coupling needs equal sizes");
    for (std::size_t i = 0; i < a.size(); ++i)
      if (std::abs(a.weights[i] - b.weights[i]) > 1e-12)
        throw InvalidInput("wasserstein: same-index coupling needs equal weights");
    return same_index_distance(a, b, p);
  }
  if (a.size() != b.size() || !uniform_weights(a.weights) ||
      !uniform_weights(b.weights))
    throw InvalidInput("wasserstein: assignment mode needs equal uniform weights");
  if (a.size() > kMaxAssignmentAtoms)
    throw InvalidInput("wasserstein: assignment mode limited to 512 atoms");
  const std::size_t n = a.size();
  std::vector<RoughPathGrid> la(n), lb(n);
  parallel_for(n, [&](std::size_t i) {
    la[i] = a.atoms[i].to_rough_path();
    lb[i] = b.atoms[i].to_rough_path();
  });
  Mat cost(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  parallel_for(n * n, [&](std::size_t idx) {
    const std::size_t i = idx / n, j = idx % n;
    const double gap = (a.atoms[i].states.row(0) - b.atoms[j].states.row(0)).norm();
    cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
        rho_p_var(la[i], lb[j], p, gap);
  });
  return solve_assignment(cost).cost / static_cast<double>(n);
}

double marginal_wasserstein(const EmpiricalPathMeasure& a,
                            const EmpiricalPathMeasure& b, std::size_t k) {
  if (a.size() != b.size() || !uniform_weights(a.weights) ||
      !uniform_weights(b.weights))
    throw InvalidInput("marginal_wasserstein: needs equal uniform weights");
  const auto n = static_cast<Eigen::Index>(a.size());
  Mat cost(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      cost(i, j) = (a.atoms[i].states.row(static_cast<Eigen::Index>(k)) -
                    b.atoms[j].states.row(static_cast<Eigen::Index>(k)))
                       .norm();
  return solve_assignment(cost).cost / static_cast<double>(n);
}

EmpiricalPathMeasure solve_finite_support(const DiscretePreferenceMeasure& nu,
                                          const std::vector<Vec>& u0_samples,
                                          const VectorFieldSet& vf,
                                          const DriftKernel& kernel,
                                          JointLiftPolicy policy) {
  const std::size_t n = nu.paths.size();
  if (n == 0 || n > kMaxSupportPaths)
    throw InvalidInput("solve_finite_support: support size must be in [1, 64]");
  if (u0_samples.size() != n)
    throw InvalidInput("solve_finite_support: need one initial state per atom");
  const int e = vf.state_dim;
  if (static_cast<long>(n) * e > kMaxJointStateDim)
    throw InvalidInput("solve_finite_support: joint state dimension exceeds 4096");
  check_weights(nu.weights, n, "solve_finite_support");

  const RoughPathGrid joint = joint_lift(nu.paths, policy);
  const int copies = static_cast<int>(n);
  const VectorFieldSet w = block_fields(vf, copies);
  const std::vector<double> weights = nu.weights;
  // W0: block m receives sum_i lambda_i sigma(y^m, y^i).
  Drift w0 = [&kernel, &weights, copies, e](std::size_t, double, const Vec& y,
                                            Vec& out) {
    out.setZero(y.size());
    if (kernel.is_zero) return;
    std::vector<Vec> partners(static_cast<std::size_t>(copies));
    for (int m = 0; m < copies; ++m) partners[m] = y.segment(m * e, e);
    Vec local(e);
    if (kernel.affine) {
      Vec mean = Vec::Zero(e);
      for (int m = 0; m < copies; ++m) mean.noalias() += weights[m] * partners[m];
      Mat gain;
      for (int m = 0; m < copies; ++m) {
        kernel.affine->offset(partners[m], local);
        kernel.affine->gain(partners[m], gain);
        local.noalias() += gain * mean;
        out.segment(m * e, e) = local;
      }
      return;
    }
    for (int m = 0; m < copies; ++m) {
      integrate_kernel(kernel, partners[m], weights, partners, local);
      out.segment(m * e, e) = local;
    }
  };
  Vec y0(copies * e);
  for (int m = 0; m < copies; ++m) y0.segment(m * e, e) = u0_samples[m];

  const SolutionPath big = solve_rde(w, w0, joint, y0, true);
  const int dim = copies * e;
  EmpiricalPathMeasure out;
  out.weights = nu.weights;
  out.atoms.resize(n);
  for (int m = 0; m < copies; ++m) {
    SolutionPath& s = out.atoms[m];
    s.times = big.times;
    s.states = big.states.middleCols(m * e, e);
    s.lift.emplace(big.times, e, 2);
    for (std::size_t k = 0; k < big.size(); ++k) {
      auto l1 = s.lift->lvl1_mut(k);
      auto l2 = s.lift->lvl2_mut(k);
      const auto b1 = big.lift->lvl1(k);
      const auto b2 = big.lift->lvl2(k);
      for (int i = 0; i < e; ++i) {
        l1[i] = b1[m * e + i];
        for (int j = 0; j < e; ++j)
          l2[i * e + j] = b2[(m * e + i) * dim + (m * e + j)];
      }
    }
    s.lift->p_hint = big.lift->p_hint;
  }
  return out;
}

std::vector<MgfRow> mgf_diagnostic(const PreferenceSpec& spec,
                                   const std::vector<double>& thetas,
                                   double alpha, std::size_t samples,
                                   std::uint64_t first_index) {
  if (samples < 100) throw InvalidInput("mgf_diagnostic: need >= 100 samples");
  std::vector<double> m(samples);
  parallel_for(samples, [&](std::size_t i) {
    const RoughPathGrid path = sample_driver(spec, first_index + i);
    m[i] = m_alpha(path, spec.p, alpha);
  });
  std::vector<MgfRow> rows;
  const double n = static_cast<double>(samples);
  for (double theta : thetas) {
    MgfRow row;
    row.theta = theta;
    double sum = 0.0, sum_sq = 0.0, largest = 0.0;
    for (double v : m) {
      const double t = std::exp(theta * v);
      sum += t;
      sum_sq += t * t;
      largest = std::max(largest, t);
    }
    row.estimate = sum / n;
    const double var = std::max(0.0, sum_sq / n - row.estimate * row.estimate);
    row.std_error = std::sqrt(var / (n - 1.0));
    row.max_share = sum > 0.0 ? largest / sum : 0.0;
    // A single draw carrying a quarter of the total mass means the sample
    // mean is not a stable estimate at this theta.
    row.heavy_tail = row.max_share > 0.25;
    rows.push_back(row);
  }
  return rows;
}

void save_ensemble_csv(const EmpiricalPathMeasure& mu, const std::string& file) {
  mu.validate();
  std::ofstream out(file);
  if (!out) throw IoError("cannot write '" + file + "'");
  const int e = mu.atoms.front().state_dim();
  const bool lift = std::all_of(mu.atoms.begin(), mu.atoms.end(),
                                [](const SolutionPath& s) { return s.lift.has_value(); });
  out << "atom,weight,k,t";
  for (int i = 0; i < e; ++i) out << ",y" << i + 1;
  if (lift)
    for (int i = 0; i < e; ++i)
      for (int j = 0; j < e; ++j) out << ",l" << i + 1 << "_" << j + 1;
  out << "\n" << std::setprecision(17);
  for (std::size_t a = 0; a < mu.size(); ++a) {
    const SolutionPath& s = mu.atoms[a];
    for (std::size_t k = 0; k < s.size(); ++k) {
      out << a << "," << mu.weights[a] << "," << k << "," << s.times[k];
      for (int i = 0; i < e; ++i)
        out << "," << s.states(static_cast<Eigen::Index>(k), i);
      if (lift)
        for (double v : s.lift->lvl2(k)) out << "," << v;
      out << "\n";
    }
  }
  if (!out) throw IoError("failed writing '" + file + "'");
}

EmpiricalPathMeasure load_ensemble_csv(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open '" + file + "'");
  std::string line;
  if (!std::getline(in, line) || line.rfind("atom,weight,k,t", 0) != 0)
    throw IoError("checkpoint header must start with 'atom,weight,k,t'");
  int e = 0, lift_cols = 0;
  {
    std::stringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) {
      if (!cell.empty() && cell[0] == 'y') ++e;
      if (!cell.empty() && cell[0] == 'l') ++lift_cols;
    }
  }
  if (e == 0 || (lift_cols != 0 && lift_cols != e * e))
    throw IoError("checkpoint header has inconsistent state columns");
  struct Row {
    std::size_t atom, k;
    double weight, t;
    std::vector<double> vals;
  };
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ls, cell, ',')) {
      try {
        vals.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw IoError("checkpoint: bad number '" + cell + "'");
      }
    }
    if (vals.size() != static_cast<std::size_t>(4 + e + lift_cols))
      throw IoError("checkpoint: row has wrong number of columns");
    rows.push_back({static_cast<std::size_t>(vals[0]),
                    static_cast<std::size_t>(vals[2]), vals[1], vals[3],
                    std::vector<double>(vals.begin() + 4, vals.end())});
  }
  if (rows.empty()) throw IoError("checkpoint has no rows");
  EmpiricalPathMeasure mu;
  std::size_t r = 0;
  while (r < rows.size()) {
    const std::size_t atom = rows[r].atom;
    if (atom != mu.atoms.size()) throw IoError("checkpoint: atoms out of order");
    std::size_t end = r;
    while (end < rows.size() && rows[end].atom == atom) ++end;
    SolutionPath s;
    for (std::size_t q = r; q < end; ++q) {
      if (rows[q].k != q - r) throw IoError("checkpoint: grid indices out of order");
      s.times.push_back(rows[q].t);
    }
    s.states.resize(static_cast<Eigen::Index>(end - r), e);
    if (lift_cols) s.lift.emplace(s.times, e, 2);
    for (std::size_t q = r; q < end; ++q) {
      const auto k = q - r;
      for (int i = 0; i < e; ++i)
        s.states(static_cast<Eigen::Index>(k), i) = rows[q].vals[i];
      if (lift_cols) {
        auto l1 = s.lift->lvl1_mut(k);
        auto l2 = s.lift->lvl2_mut(k);
        for (int i = 0; i < e; ++i)
          l1[i] = rows[q].vals[i] - rows[r].vals[i];
        for (int c = 0; c < e * e; ++c) l2[c] = rows[q].vals[e + c];
      }
    }
    mu.weights.push_back(rows[r].weight);
    mu.atoms.push_back(std::move(s));
    r = end;
  }
  mu.validate();
  return mu;
}

}  // namespace roughmf
