#pragma once

#include "roughmf/tensor.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace roughmf {

// A time grid with a group element at each grid time. Values are stored flat
// (lvl1 as n x d, lvl2 as n x d x d row-major) and are always based at the
// identity: values[0] == 1.
class RoughPathGrid {
 public:
  RoughPathGrid() = default;
  // Identity-filled path on `times`.
  RoughPathGrid(std::vector<double> times, int dim, int level);

  static RoughPathGrid from_values(std::vector<double> times,
                                   const std::vector<GroupElement>& values);
  // Constant identity path.
  static RoughPathGrid constant(std::vector<double> times, int dim, int level);

  std::size_t size() const { return times_.size(); }
  int dim() const { return dim_; }
  int level() const { return level_; }
  const std::vector<double>& times() const { return times_; }
  double horizon() const { return times_.back(); }

  std::span<const double> lvl1(std::size_t k) const {
    return {lvl1_.data() + k * dim_, static_cast<std::size_t>(dim_)};
  }
  std::span<const double> lvl2(std::size_t k) const {
    return {lvl2_.data() + k * dim_ * dim_,
            level_ == 2 ? static_cast<std::size_t>(dim_ * dim_) : 0u};
  }
  std::span<double> lvl1_mut(std::size_t k) {
    return {lvl1_.data() + k * dim_, static_cast<std::size_t>(dim_)};
  }
  std::span<double> lvl2_mut(std::size_t k) {
    return {lvl2_.data() + k * dim_ * dim_,
            level_ == 2 ? static_cast<std::size_t>(dim_ * dim_) : 0u};
  }

  GroupElement at(std::size_t k) const;
  void set(std::size_t k, const GroupElement& g);
  // x_{t_s}^{-1} (x) x_{t_t}
  GroupElement increment(std::size_t s, std::size_t t) const;

  // Every other grid point; increments of the result are exact group products
  // of the fine increments. Requires an odd number of points.
  RoughPathGrid subsample2() const;

  double p_hint = 2.5;

 private:
  std::vector<double> times_;
  int dim_ = 0;
  int level_ = 2;
  std::vector<double> lvl1_;
  std::vector<double> lvl2_;
};

// Uniform grid t_k = k * horizon / steps, k = 0..steps.
std::vector<double> uniform_times(std::size_t steps, double horizon);

bool same_grid(const RoughPathGrid& a, const RoughPathGrid& b);

}  // namespace roughmf
