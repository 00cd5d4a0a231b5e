#include "roughmf/rde.hpp"

#include "roughmf/drivers.hpp"
#include "roughmf/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace roughmf {

double jacobian_residual(const VectorFieldSet& vf,
                         std::span<const Vec> probes) {
  const int e = vf.state_dim;
  const int d = vf.num_fields;
  Mat plus(e, d), minus(e, d);
  std::vector<Mat> jac;
  double worst = 0.0;
  for (const Vec& y : probes) {
    vf.jac(y, jac);
    const double h = 1e-6 * std::max(1.0, y.norm());
    for (int c = 0; c < e; ++c) {
      Vec yp = y, ym = y;
      yp(c) += h;
      ym(c) -= h;
      vf.eval(yp, plus);
      vf.eval(ym, minus);
      for (int i = 0; i < d; ++i) {
        const Vec fd = (plus.col(i) - minus.col(i)) / (2.0 * h);
        const Vec an = jac[i].col(c);
        worst = std::max(worst, (fd - an).norm() / std::max(1.0, an.norm()));
      }
    }
  }
  return worst;
}

VectorFieldSet register_fields(VectorFieldSet vf, std::uint64_t probe_seed,
                               int probes, double probe_scale) {
  if (vf.num_fields <= 0 || vf.state_dim <= 0 || !vf.eval || !vf.jac)
    throw InvalidInput("vector field set is incomplete");
  auto rng = make_rng(probe_seed, 0, RngStream::kProbe);
  std::uniform_real_distribution<double> unif(-probe_scale, probe_scale);
  std::vector<Vec> pts;
  for (int k = 0; k < probes; ++k) {
    Vec y(vf.state_dim);
    for (int c = 0; c < vf.state_dim; ++c) y(c) = unif(rng);
    pts.push_back(std::move(y));
  }
  const double r = jacobian_residual(vf, pts);
  if (r > 1e-5) {
    std::ostringstream os;
    os << "vector field Jacobian disagrees with finite differences (relative "
       << r << ")";
    throw InvalidInput(os.str());
  }
  return vf;
}

Vec lie_bracket_fd(const VectorFieldSet& vf, int p, int q, const Vec& y,
                   double h) {
  Mat v(vf.state_dim, vf.num_fields);
  vf.eval(y, v);
  const Vec vp = v.col(p);
  const Vec vq = v.col(q);
  auto directional = [&](int field, const Vec& dir) {
    Mat a(vf.state_dim, vf.num_fields), b(vf.state_dim, vf.num_fields);
    vf.eval(y + h * dir, a);
    vf.eval(y - h * dir, b);
    return Vec((a.col(field) - b.col(field)) / (2.0 * h));
  };
  return directional(q, vp) - directional(p, vq);
}

Drift zero_drift() {
  return [](std::size_t, double, const Vec& y, Vec& out) {
    out.setZero(y.size());
  };
}

Drift constant_drift(Vec c) {
  return [c = std::move(c)](std::size_t, double, const Vec&, Vec& out) {
    out = c;
  };
}

RoughPathGrid SolutionPath::to_rough_path() const {
  if (lift) return *lift;
  Mat pts = states;
  for (Eigen::Index k = 0; k < pts.rows(); ++k) pts.row(k) -= states.row(0);
  return signature_pl(pts, 2, times);
}

DavieStepper::DavieStepper(const VectorFieldSet& vf)
    : vf_(vf), v_(vf.state_dim, vf.num_fields), u_(vf.state_dim) {}

void DavieStepper::step(const Vec& y, const Vec& drift, double dt,
                        const Vec& x1, const Mat& x2, Vec& y_next,
                        Mat* lift_inc) {
  vf_.eval(y, v_);
  vf_.jac(y, jac_);
  y_next = y;
  y_next.noalias() += dt * drift;
  y_next.noalias() += v_ * x1;
  for (int j = 0; j < vf_.num_fields; ++j) {
    // sum_i x2(i, j) DV^j V^i = DV^j (V x2(:, j))
    u_.noalias() = v_ * x2.col(j);
    y_next.noalias() += jac_[j] * u_;
  }
  if (lift_inc) lift_inc->noalias() = v_ * x2 * v_.transpose();
}

void driver_increment(const RoughPathGrid& driver, std::size_t k, Vec& x1,
                      Mat& x2) {
  const int d = driver.dim();
  const auto a1 = driver.lvl1(k);
  const auto b1 = driver.lvl1(k + 1);
  x1.resize(d);
  for (int i = 0; i < d; ++i) x1(i) = b1[i] - a1[i];
  x2.resize(d, d);
  if (driver.level() == 2) {
    const auto a2 = driver.lvl2(k);
    const auto b2 = driver.lvl2(k + 1);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        x2(i, j) = b2[i * d + j] - a2[i * d + j] - a1[i] * x1(j);
  } else {
    x2 = 0.5 * x1 * x1.transpose();
  }
}

namespace detail {

void check_state(const Vec& y_next, std::size_t step) {
  if (!y_next.allFinite() || y_next.norm() > kBlowUpBound) {
    std::ostringstream os;
    os << "solution diverged at step " << step;
    throw Divergence(os.str(), step);
  }
}

void extend_lift(RoughPathGrid& lift, Mat& running2, std::size_t k,
                 const Vec& y0, const Vec& y, const Vec& y_next,
                 const Mat& lift_inc) {
  // y2_{0,k+1} = y2_{0,k} + (y_k - y_0) (x) (y_{k+1} - y_k) + local lift
  const Vec base = y - y0;
  running2.noalias() += base * (y_next - y).transpose();
  running2 += lift_inc;
  const int e = static_cast<int>(y.size());
  auto l1 = lift.lvl1_mut(k + 1);
  auto l2 = lift.lvl2_mut(k + 1);
  for (int i = 0; i < e; ++i) {
    l1[i] = y_next(i) - y0(i);
    for (int j = 0; j < e; ++j) l2[i * e + j] = running2(i, j);
  }
}

}  // namespace detail

SolutionPath solve_rde(const VectorFieldSet& vf, const Drift& drift,
                       const RoughPathGrid& driver, const Vec& y0,
                       bool want_lift) {
  if (driver.dim() != vf.num_fields)
    throw InvalidInput("solve_rde: driver dimension differs from field count");
  if (y0.size() != vf.state_dim)
    throw InvalidInput("solve_rde: initial state has wrong dimension");
  if (driver.level() != 2)
    throw InvalidInput("solve_rde: driver must be a level-2 path");
  const int e = vf.state_dim;
  const std::size_t n = driver.size();
  SolutionPath sol;
  sol.times = driver.times();
  sol.states.resize(static_cast<Eigen::Index>(n), e);
  sol.states.row(0) = y0.transpose();
  if (want_lift) sol.lift.emplace(driver.times(), e, 2);

  DavieStepper stepper(vf);
  Vec y = y0, y_next(e), b(e), x1;
  Mat x2, lift_inc(e, e);
  Mat running2 = Mat::Zero(e, e);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double t = driver.times()[k];
    const double dt = driver.times()[k + 1] - t;
    drift(k, t, y, b);
    driver_increment(driver, k, x1, x2);
    stepper.step(y, b, dt, x1, x2, y_next, want_lift ? &lift_inc : nullptr);
    detail::check_state(y_next, k);
    if (want_lift)
      detail::extend_lift(*sol.lift, running2, k, y0, y, y_next, lift_inc);
    sol.states.row(static_cast<Eigen::Index>(k + 1)) = y_next.transpose();
    y.swap(y_next);
  }
  if (sol.lift) sol.lift->p_hint = driver.p_hint;
  return sol;
}

RoughPathGrid refine_linear_midpoint(const RoughPathGrid& driver) {
  const std::size_t n = driver.size();
  const int d = driver.dim();
  std::vector<double> times;
  Mat pts(static_cast<Eigen::Index>(2 * n - 1), d);
  for (std::size_t k = 0; k < n; ++k) {
    for (int i = 0; i < d; ++i)
      pts(static_cast<Eigen::Index>(2 * k), i) = driver.lvl1(k)[i];
    times.push_back(driver.times()[k]);
    if (k + 1 < n) {
      for (int i = 0; i < d; ++i)
        pts(static_cast<Eigen::Index>(2 * k + 1), i) =
            0.5 * (driver.lvl1(k)[i] + driver.lvl1(k + 1)[i]);
      times.push_back(0.5 * (driver.times()[k] + driver.times()[k + 1]));
    }
  }
  RoughPathGrid out = signature_pl(pts, driver.level(), times);
  out.p_hint = driver.p_hint;
  return out;
}

ErrorEstimate estimate_error(const VectorFieldSet& vf, const Drift& drift,
                             const RoughPathGrid& driver, const Vec& y0,
                             bool want_lift, Refinement refinement) {
  RoughPathGrid coarse, fine;
  if (refinement == Refinement::kSubsampleFine) {
    fine = driver;
    coarse = driver.subsample2();
  } else {
    coarse = driver;
    fine = refine_linear_midpoint(driver);
  }
  SolutionPath a = solve_rde(vf, drift, coarse, y0, false);
  ErrorEstimate out{solve_rde(vf, drift, fine, y0, want_lift), 0.0};
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double gap = (a.states.row(static_cast<Eigen::Index>(k)) -
                        out.solution.states.row(static_cast<Eigen::Index>(2 * k)))
                           .norm();
    out.err = std::max(out.err, gap);
  }
  return out;
}

RoughPathGrid reversed(const RoughPathGrid& driver) {
  const std::size_t n = driver.size();
  std::vector<double> times(n);
  const double t_end = driver.times().back();
  const double t_start = driver.times().front();
  for (std::size_t k = 0; k < n; ++k)
    times[k] = t_start + (t_end - driver.times()[n - 1 - k]);
  RoughPathGrid out(std::move(times), driver.dim(), driver.level());
  const GroupElement end_inv = inverse(driver.at(n - 1));
  for (std::size_t k = 1; k < n; ++k)
    out.set(k, tensor_mul(end_inv, driver.at(n - 1 - k)));
  out.p_hint = driver.p_hint;
  return out;
}

}  // namespace roughmf
