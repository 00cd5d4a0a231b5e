#include "roughmf/rough_path.hpp"

#include "roughmf/error.hpp"

#include <algorithm>

namespace roughmf {

namespace {

void check_times(const std::vector<double>& times) {
  if (times.size() < 2) throw InvalidInput("grid needs at least two times");
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (!(times[k] > times[k - 1]))
      throw InvalidInput("grid times must be strictly increasing");
  }
}

}  // namespace

RoughPathGrid::RoughPathGrid(std::vector<double> times, int dim, int level)
    : times_(std::move(times)), dim_(dim), level_(level) {
  check_times(times_);
  if (dim <= 0) throw InvalidInput("dimension must be positive");
  if (level != 1 && level != 2) throw InvalidInput("level must be 1 or 2");
  lvl1_.assign(times_.size() * dim_, 0.0);
  if (level_ == 2) lvl2_.assign(times_.size() * dim_ * dim_, 0.0);
}

RoughPathGrid RoughPathGrid::from_values(
    std::vector<double> times, const std::vector<GroupElement>& values) {
  if (values.size() != times.size())
    throw InvalidInput("from_values: times and values differ in length");
  if (values.empty()) throw InvalidInput("from_values: empty path");
  RoughPathGrid out(std::move(times), values.front().dim(),
                    values.front().level);
  if (!values.front().is_identity())
    throw InvalidInput("from_values: path must start at the identity");
  for (std::size_t k = 0; k < values.size(); ++k) out.set(k, values[k]);
  return out;
}

RoughPathGrid RoughPathGrid::constant(std::vector<double> times, int dim,
                                      int level) {
  return RoughPathGrid(std::move(times), dim, level);
}

GroupElement RoughPathGrid::at(std::size_t k) const {
  GroupElement g;
  g.level = level_;
  g.lvl1 = Eigen::Map<const Vec>(lvl1_.data() + k * dim_, dim_);
  if (level_ == 2) {
    g.lvl2 = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic,
                                            Eigen::Dynamic, Eigen::RowMajor>>(
        lvl2_.data() + k * dim_ * dim_, dim_, dim_);
  }
  return g;
}

void RoughPathGrid::set(std::size_t k, const GroupElement& g) {
  if (g.dim() != dim_ || g.level != level_)
    throw InvalidInput("RoughPathGrid::set: element shape mismatch");
  std::copy(g.lvl1.data(), g.lvl1.data() + dim_, lvl1_.data() + k * dim_);
  if (level_ == 2) {
    double* dst = lvl2_.data() + k * dim_ * dim_;
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) dst[i * dim_ + j] = g.lvl2(i, j);
  }
}

GroupElement RoughPathGrid::increment(std::size_t s, std::size_t t) const {
  return roughmf::increment(at(s), at(t));
}

RoughPathGrid RoughPathGrid::subsample2() const {
  if (size() % 2 == 0)
    throw InvalidInput("subsample2: need an odd number of grid points");
  std::vector<double> t;
  for (std::size_t k = 0; k < size(); k += 2) t.push_back(times_[k]);
  RoughPathGrid out(std::move(t), dim_, level_);
  for (std::size_t k = 0; k < out.size(); ++k) {
    std::copy_n(lvl1_.data() + 2 * k * dim_, dim_, out.lvl1_.data() + k * dim_);
    if (level_ == 2) {
      std::copy_n(lvl2_.data() + 2 * k * dim_ * dim_, dim_ * dim_,
                  out.lvl2_.data() + k * dim_ * dim_);
    }
  }
  out.p_hint = p_hint;
  return out;
}

std::vector<double> uniform_times(std::size_t steps, double horizon) {
  if (steps == 0) throw InvalidInput("uniform_times: need at least one step");
  if (!(horizon > 0.0)) throw InvalidInput("uniform_times: horizon must be > 0");
  std::vector<double> t(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k)
    t[k] = horizon * static_cast<double>(k) / static_cast<double>(steps);
  return t;
}

bool same_grid(const RoughPathGrid& a, const RoughPathGrid& b) {
  return a.times() == b.times() && a.dim() == b.dim() && a.level() == b.level();
}

}  // namespace roughmf
