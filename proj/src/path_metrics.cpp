#include "roughmf/path_metrics.hpp"

#include "roughmf/error.hpp"
#include "roughmf/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace roughmf {

namespace {

void require_p(double p) {
  if (!(p >= 1.0) || !std::isfinite(p))
    throw InvalidInput("p must be a finite real >= 1");
}

// Squared magnitudes of the level-1 and level-2 parts of x_{s,t}.
struct IncrementSq {
  double lvl1 = 0.0;
  double lvl2 = 0.0;
};

IncrementSq increment_sq(const RoughPathGrid& x, std::size_t s,
                         std::size_t t) {
  const int d = x.dim();
  const auto a1 = x.lvl1(s);
  const auto b1 = x.lvl1(t);
  IncrementSq out;
  for (int i = 0; i < d; ++i) {
    const double v = b1[i] - a1[i];
    out.lvl1 += v * v;
  }
  if (x.level() == 2) {
    const auto a2 = x.lvl2(s);
    const auto b2 = x.lvl2(t);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        const double v =
            b2[i * d + j] - a2[i * d + j] - a1[i] * (b1[j] - a1[j]);
        out.lvl2 += v * v;
      }
    }
  }
  return out;
}

// Squared magnitudes of pi_1 and pi_2 of x_{s,t} - y_{s,t}.
IncrementSq difference_sq(const RoughPathGrid& x, const RoughPathGrid& y,
                          std::size_t s, std::size_t t) {
  const int d = x.dim();
  const auto xa1 = x.lvl1(s);
  const auto xb1 = x.lvl1(t);
  const auto ya1 = y.lvl1(s);
  const auto yb1 = y.lvl1(t);
  IncrementSq out;
  for (int i = 0; i < d; ++i) {
    const double v = (xb1[i] - xa1[i]) - (yb1[i] - ya1[i]);
    out.lvl1 += v * v;
  }
  if (x.level() == 2) {
    const auto xa2 = x.lvl2(s);
    const auto xb2 = x.lvl2(t);
    const auto ya2 = y.lvl2(s);
    const auto yb2 = y.lvl2(t);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        const int k = i * d + j;
        const double vx = xb2[k] - xa2[k] - xa1[i] * (xb1[j] - xa1[j]);
        const double vy = yb2[k] - ya2[k] - ya1[i] * (yb1[j] - ya1[j]);
        const double v = vx - vy;
        out.lvl2 += v * v;
      }
    }
  }
  return out;
}

// hom_norm(x_{s,t})^p from squared parts: max(|a|, sqrt(2|A|))^p.
double hom_norm_pow(const IncrementSq& sq, double p) {
  const double base = std::max(sq.lvl1, 2.0 * std::sqrt(sq.lvl2));
  return base == 0.0 ? 0.0 : std::pow(base, 0.5 * p);
}

void require_indices(const RoughPathGrid& path, std::size_t s,
                     std::size_t t) {
  if (!(s < t) || t >= path.size())
    throw InvalidInput("grid indices must satisfy s < t < size");
}

// best[j] = max_{s <= i < j} best[i] + cost(i, j); returns best[t].
template <class Cost>
double sup_over_partitions(std::size_t s, std::size_t t, Cost&& cost,
                           std::vector<double>& best) {
  best.assign(t + 1, 0.0);
  for (std::size_t j = s + 1; j <= t; ++j) {
    double m = 0.0;
    for (std::size_t i = s; i < j; ++i) m = std::max(m, best[i] + cost(i, j));
    best[j] = m;
  }
  return best[t];
}

}  // namespace

ControlTable build_control_table(const RoughPathGrid& path, double p) {
  require_p(p);
  const std::size_t n = path.size();
  if (n > kMaxTablePoints) {
    std::ostringstream os;
    os << "control table limited to " << kMaxTablePoints << " grid points, got "
       << n;
    throw InvalidInput(os.str());
  }
  std::vector<double> cost(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      cost[i * n + j] = hom_norm_pow(increment_sq(path, i, j), p);

  ControlTable table(n, p);
  // Rows are independent; each row is filled by the same sequential DP.
  std::vector<std::vector<double>> rows(n);
  parallel_for(n, [&](std::size_t i) {
    std::vector<double>& best = rows[i];
    best.assign(n, 0.0);
    for (std::size_t j = i + 1; j < n; ++j) {
      double m = 0.0;
      for (std::size_t k = i; k < j; ++k)
        m = std::max(m, best[k] + cost[k * n + j]);
      best[j] = m;
    }
  });
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) table.at(i, j) = rows[i][j];
  return table;
}

double p_variation(const RoughPathGrid& path, double p, std::size_t s_idx,
                   std::size_t t_idx) {
  require_p(p);
  require_indices(path, s_idx, t_idx);
  std::vector<double> best;
  return sup_over_partitions(
      s_idx, t_idx,
      [&](std::size_t i, std::size_t j) {
        return hom_norm_pow(increment_sq(path, i, j), p);
      },
      best);
}

double p_variation(const RoughPathGrid& path, double p) {
  return p_variation(path, p, 0, path.size() - 1);
}

double m_alpha(const ControlTable& omega, double alpha) {
  if (!(alpha > 0.0)) throw InvalidInput("alpha must be positive");
  const std::size_t n = omega.size();
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (omega(k, k + 1) > alpha) {
      std::ostringstream os;
      os << "grid too coarse for alpha = " << alpha << ": step " << k
         << " has omega " << omega(k, k + 1);
      throw GridTooCoarse(os.str(), k, omega(k, k + 1));
    }
  }
  std::vector<double> best(n, 0.0);
  for (std::size_t j = 1; j < n; ++j) {
    double m = 0.0;
    for (std::size_t i = 0; i < j; ++i) {
      const double w = omega(i, j);
      if (w <= alpha) m = std::max(m, best[i] + w);
    }
    best[j] = m;
  }
  return best[n - 1];
}

double m_alpha(const RoughPathGrid& path, double p, double alpha) {
  return m_alpha(build_control_table(path, p), alpha);
}

double rho_p_var(const RoughPathGrid& x, const RoughPathGrid& y, double p,
                 double start_gap) {
  require_p(p);
  if (!same_grid(x, y))
    throw InvalidInput("rho_p_var: paths must share grid, dim and level");
  const std::size_t n = x.size();
  const bool two = x.level() == 2;
  // Both level sums run in one pass over (i, j) so each difference is
  // evaluated once.
  std::vector<double> best1(n, 0.0), best2(n, 0.0);
  for (std::size_t j = 1; j < n; ++j) {
    double m1 = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < j; ++i) {
      const IncrementSq sq = difference_sq(x, y, i, j);
      const double c1 = sq.lvl1 == 0.0 ? 0.0 : std::pow(sq.lvl1, 0.5 * p);
      m1 = std::max(m1, best1[i] + c1);
      if (two) {
        const double c2 = sq.lvl2 == 0.0 ? 0.0 : std::pow(sq.lvl2, 0.25 * p);
        m2 = std::max(m2, best2[i] + c2);
      }
    }
    best1[j] = m1;
    best2[j] = m2;
  }
  double level_max = std::pow(best1[n - 1], 1.0 / p);
  if (two) level_max = std::max(level_max, std::pow(best2[n - 1], 2.0 / p));
  return start_gap + level_max;
}

PvarBoundReport pvar_bound_check(const ControlTable& omega, double alpha) {
  const double p = omega.p();
  PvarBoundReport r;
  r.m_alpha = m_alpha(omega, alpha);
  r.lhs = omega(0, omega.size() - 1);
  r.rhs = std::pow(2.0, p - 1.0) * alpha *
          std::max(1.0, std::pow(alpha, -p) * std::pow(r.m_alpha, p));
  r.holds = r.lhs <= r.rhs;
  return r;
}

PvarBoundReport pvar_bound_check(const RoughPathGrid& path, double p,
                                 double alpha) {
  return pvar_bound_check(build_control_table(path, p), alpha);
}

double rho_p_omega(const RoughPathGrid& x, const RoughPathGrid& y, double p,
                   const ControlTable& omega) {
  require_p(p);
  if (!same_grid(x, y) || omega.size() != x.size())
    throw InvalidInput("rho_p_omega: grid mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const double w = omega(i, j);
      if (w <= 0.0) continue;
      const IncrementSq sq = difference_sq(x, y, i, j);
      worst = std::max(worst, std::sqrt(sq.lvl1) / std::pow(w, 1.0 / p));
      if (x.level() == 2)
        worst = std::max(worst, std::sqrt(sq.lvl2) / std::pow(w, 2.0 / p));
    }
  }
  return worst;
}

}  // namespace roughmf
