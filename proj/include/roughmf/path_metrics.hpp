#pragma once

#include "roughmf/rough_path.hpp"

#include <cstddef>
#include <vector>

namespace roughmf {

// Table builders are cubic in the grid size; they refuse larger grids.
inline constexpr std::size_t kMaxTablePoints = 513;

// omega(t_i, t_j) = ||x||^p_{p-var;[t_i,t_j]} over grid partitions, for all
// i <= j. Superadditive and zero on the diagonal.
class ControlTable {
 public:
  ControlTable(std::size_t n, double p) : n_(n), p_(p), omega_(n * n, 0.0) {}

  std::size_t size() const { return n_; }
  double p() const { return p_; }
  double operator()(std::size_t i, std::size_t j) const {
    return omega_[i * n_ + j];
  }
  double& at(std::size_t i, std::size_t j) { return omega_[i * n_ + j]; }

 private:
  std::size_t n_;
  double p_;
  std::vector<double> omega_;
};

ControlTable build_control_table(const RoughPathGrid& path, double p);

// Exact grid supremum of sum ||x_{t_i,t_{i+1}}||^p over partitions of
// [t_s, t_t]; returns the p-th power.
double p_variation(const RoughPathGrid& path, double p, std::size_t s_idx,
                   std::size_t t_idx);
double p_variation(const RoughPathGrid& path, double p);

// Accumulated alpha-local variation. Throws GridTooCoarse if some single grid
// step already has control above alpha.
double m_alpha(const RoughPathGrid& path, double p, double alpha);
double m_alpha(const ControlTable& omega, double alpha);

// Inhomogeneous p-variation distance. `start_gap` is |x_0 - y_0| for paths
// carried with a base point; RoughPathGrid itself is always based at 1.
double rho_p_var(const RoughPathGrid& x, const RoughPathGrid& y, double p,
                 double start_gap = 0.0);

struct PvarBoundReport {
  double lhs = 0.0;  // omega(0, T)
  double rhs = 0.0;  // 2^{p-1} alpha max{1, alpha^{-p} M_alpha^p}
  double m_alpha = 0.0;
  bool holds = false;
};

PvarBoundReport pvar_bound_check(const RoughPathGrid& path, double p,
                                 double alpha);
PvarBoundReport pvar_bound_check(const ControlTable& omega, double alpha);

// Diagnostic only: max over levels of sup_{s<t} |pi_i(x_{s,t} - y_{s,t})| /
// omega(s,t)^{i/p}, pairs with omega == 0 skipped.
double rho_p_omega(const RoughPathGrid& x, const RoughPathGrid& y, double p,
                   const ControlTable& omega);

}  // namespace roughmf
