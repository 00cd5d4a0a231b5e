#include "roughmf/drivers.hpp"

#include "roughmf/error.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <tuple>

namespace roughmf {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  std::uint64_t z = x + 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// Lower Cholesky factor of Cov(X_{t_1}, ..., X_{t_G}) for fBm on the uniform
// grid, cached per (H, G, T).
const Mat& fbm_factor(double hurst, std::size_t steps, double horizon) {
  static std::mutex mu;
  static std::map<std::tuple<double, std::size_t, double>, Mat> cache;
  std::lock_guard<std::mutex> lock(mu);
  const auto key = std::make_tuple(hurst, steps, horizon);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  const auto n = static_cast<Eigen::Index>(steps);
  Mat cov(n, n);
  const double h2 = 2.0 * hurst;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double ti = horizon * static_cast<double>(i + 1) / steps;
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double tj = horizon * static_cast<double>(j + 1) / steps;
      const double c = 0.5 * (std::pow(ti, h2) + std::pow(tj, h2) -
                              std::pow(std::abs(ti - tj), h2));
      cov(i, j) = c;
      cov(j, i) = c;
    }
  }
  Eigen::LLT<Mat> llt(cov);
  if (llt.info() != Eigen::Success)
    throw InvalidInput("fBm covariance is not positive definite on this grid");
  return cache.emplace(key, llt.matrixL()).first->second;
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index,
                       std::uint64_t stream) {
  return splitmix64(splitmix64(splitmix64(seed) ^ index) ^
                    (stream * 0xD1B54A32D192ED03ULL));
}

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t index,
                         RngStream stream) {
  return std::mt19937_64(
      mix_seed(seed, index, static_cast<std::uint64_t>(stream)));
}

PathCorpus read_corpus_csv(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open corpus file '" + file + "'");
  std::string line;
  if (!std::getline(in, line)) throw IoError("corpus file is empty");
  int dim = -1;
  {
    std::stringstream hs(line);
    std::string cell;
    int col = 0;
    while (std::getline(hs, cell, ',')) ++col;
    dim = col - 2;
    if (dim < 1 || line.rfind("path,t,", 0) != 0)
      throw IoError("corpus header must be 'path,t,x1,...,xd'");
  }
  std::vector<std::vector<double>> rows;
  std::vector<long> ids;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ls, cell, ',')) {
      try {
        vals.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw IoError("corpus: bad number '" + cell + "'");
      }
    }
    if (static_cast<int>(vals.size()) != dim + 2)
      throw IoError("corpus: row has wrong number of columns");
    ids.push_back(static_cast<long>(vals[0]));
    rows.push_back(std::move(vals));
  }
  PathCorpus corpus;
  std::size_t start = 0;
  while (start < rows.size()) {
    std::size_t end = start;
    while (end < rows.size() && ids[end] == ids[start]) ++end;
    std::vector<double> times;
    Mat pts(static_cast<Eigen::Index>(end - start), dim);
    for (std::size_t r = start; r < end; ++r) {
      times.push_back(rows[r][1]);
      for (int c = 0; c < dim; ++c)
        pts(static_cast<Eigen::Index>(r - start), c) = rows[r][2 + c];
    }
    if (corpus.paths.empty()) {
      corpus.times = times;
    } else if (times != corpus.times) {
      throw IoError("corpus: all paths must share the same time column");
    }
    corpus.paths.push_back(std::move(pts));
    start = end;
  }
  if (corpus.paths.empty()) throw IoError("corpus contains no paths");
  return corpus;
}

void PreferenceSpec::validate() const {
  if (dim <= 0) throw InvalidInput("driver dimension must be positive");
  if (!(horizon > 0.0)) throw InvalidInput("horizon must be positive");
  if (!is_power_of_two(grid_size))
    throw InvalidInput("grid size must be a power of two");
  if (!(p >= 1.0 && p < 3.0)) throw InvalidInput("p must lie in [1, 3)");
  if (family == DriverFamily::kFractional) {
    if (!(hurst > 1.0 / 3.0 && hurst <= 1.0))
      throw InvalidInput("Hurst parameter must lie in (1/3, 1]");
    if (grid_size > 4096)
      throw InvalidInput("fBm sampling limited to grid size 4096");
  }
  if (family == DriverFamily::kCorpus) {
    if (!corpus || corpus->paths.empty())
      throw InvalidInput("corpus family needs a loaded corpus");
    if (corpus->times.size() != grid_size + 1)
      throw InvalidInput("corpus grid does not match grid size");
    if (corpus->paths.front().cols() != dim)
      throw InvalidInput("corpus dimension does not match driver dimension");
  }
  if (volatility.kind == VolatilityRule::Kind::kPerIndividual &&
      !volatility.per_individual)
    throw InvalidInput("per-individual volatility needs a function");
  if (!std::isfinite(volatility.scale))
    throw InvalidInput("volatility scale must be finite");
}

Mat sample_points(const PreferenceSpec& spec, std::uint64_t index) {
  spec.validate();
  const auto steps = static_cast<Eigen::Index>(spec.grid_size);
  const int d = spec.dim;
  Mat pts = Mat::Zero(steps + 1, d);
  switch (spec.family) {
    case DriverFamily::kBrownian: {
      auto rng = make_rng(spec.seed, index, RngStream::kDriver);
      std::normal_distribution<double> normal;
      const double sd = std::sqrt(spec.horizon / static_cast<double>(steps));
      for (Eigen::Index k = 1; k <= steps; ++k)
        for (int c = 0; c < d; ++c)
          pts(k, c) = pts(k - 1, c) + sd * normal(rng);
      break;
    }
    case DriverFamily::kFractional: {
      auto rng = make_rng(spec.seed, index, RngStream::kDriver);
      std::normal_distribution<double> normal;
      Mat z(steps, d);
      for (int c = 0; c < d; ++c)
        for (Eigen::Index k = 0; k < steps; ++k) z(k, c) = normal(rng);
      if (spec.hurst == 1.0) {
        // X_t = t Z: rank-one covariance.
        for (Eigen::Index k = 1; k <= steps; ++k)
          pts.row(k) = (spec.horizon * static_cast<double>(k) / steps) *
                       z.row(0);
      } else {
        const Mat& factor = fbm_factor(spec.hurst, spec.grid_size, spec.horizon);
        pts.bottomRows(steps) = factor.triangularView<Eigen::Lower>() * z;
      }
      break;
    }
    case DriverFamily::kCorpus: {
      const Mat& src =
          spec.corpus->paths[index % spec.corpus->paths.size()];
      for (Eigen::Index k = 0; k <= steps; ++k)
        pts.row(k) = src.row(k) - src.row(0);
      break;
    }
  }
  return pts;
}

double volatility_of(const PreferenceSpec& spec, std::uint64_t index,
                     const Mat& points) {
  switch (spec.volatility.kind) {
    case VolatilityRule::Kind::kConstant:
      return spec.volatility.scale;
    case VolatilityRule::Kind::kPerIndividual:
      return spec.volatility.scale * spec.volatility.per_individual(index);
    case VolatilityRule::Kind::kSupNormalized: {
      double sup = 0.0;
      for (Eigen::Index k = 0; k < points.rows(); ++k)
        sup = std::max(sup, points.row(k).norm());
      return sup > 0.0 ? spec.volatility.scale / sup : 0.0;
    }
  }
  return spec.volatility.scale;
}

RoughPathGrid sample_driver(const PreferenceSpec& spec, std::uint64_t index) {
  const Mat pts = sample_points(spec, index);
  const double sigma = volatility_of(spec, index, pts);
  std::vector<double> times = spec.family == DriverFamily::kCorpus
                                  ? spec.corpus->times
                                  : uniform_times(spec.grid_size, spec.horizon);
  if (spec.family == DriverFamily::kCorpus) {
    const double t0 = times.front();
    for (double& t : times) t -= t0;
  }
  RoughPathGrid path = signature_pl(pts, 2, times);
  if (sigma != 1.0) {
    for (std::size_t k = 0; k < path.size(); ++k)
      path.set(k, dilate(path.at(k), sigma));
  }
  path.p_hint = spec.p;
  return path;
}

RoughPathGrid joint_lift(std::span<const RoughPathGrid> paths,
                         JointLiftPolicy policy) {
  if (paths.empty()) throw InvalidInput("joint_lift: no paths");
  const RoughPathGrid& first = paths.front();
  if (first.level() != 2) throw InvalidInput("joint_lift: paths must be level 2");
  for (const auto& p : paths) {
    if (!same_grid(p, first))
      throw InvalidInput("joint_lift: paths must share grid and dimension");
  }
  if (paths.size() == 1) return first;

  const int d = first.dim();
  const auto n_paths = static_cast<int>(paths.size());
  const int dim = n_paths * d;
  const std::size_t n = first.size();
  RoughPathGrid out(first.times(), dim, 2);
  out.p_hint = first.p_hint;

  RoughPathGrid joint_pl;
  if (policy == JointLiftPolicy::kJointPiecewiseLinear) {
    Mat pts(static_cast<Eigen::Index>(n), dim);
    for (std::size_t k = 0; k < n; ++k)
      for (int a = 0; a < n_paths; ++a)
        for (int i = 0; i < d; ++i)
          pts(static_cast<Eigen::Index>(k), a * d + i) = paths[a].lvl1(k)[i];
    joint_pl = signature_pl(pts, 2, first.times());
  }

  for (std::size_t k = 0; k < n; ++k) {
    auto l1 = out.lvl1_mut(k);
    auto l2 = out.lvl2_mut(k);
    for (int a = 0; a < n_paths; ++a)
      for (int i = 0; i < d; ++i) l1[a * d + i] = paths[a].lvl1(k)[i];
    for (int a = 0; a < n_paths; ++a) {
      for (int b = 0; b < n_paths; ++b) {
        for (int i = 0; i < d; ++i) {
          for (int j = 0; j < d; ++j) {
            const int r = a * d + i;
            const int c = b * d + j;
            double v;
            if (a == b) {
              v = paths[a].lvl2(k)[i * d + j];
            } else if (policy == JointLiftPolicy::kZeroCrossArea) {
              v = 0.5 * l1[r] * l1[c];
            } else {
              v = joint_pl.lvl2(k)[r * dim + c];
            }
            l2[r * dim + c] = v;
          }
        }
      }
    }
  }
  return out;
}

double DiscretePreferenceMeasure::expectation(
    const std::function<double(const RoughPathGrid&)>& f) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < paths.size(); ++i) acc += weights[i] * f(paths[i]);
  return acc;
}

DiscretePreferenceMeasure discrete_measure(std::vector<double> weights,
                                           std::vector<RoughPathGrid> paths) {
  if (weights.size() != paths.size() || weights.empty())
    throw InvalidInput("discrete_measure: need one weight per path");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw InvalidInput("discrete_measure: negative weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw InvalidInput("discrete_measure: weights must sum to 1");
  for (const auto& p : paths) {
    if (!same_grid(p, paths.front()))
      throw InvalidInput("discrete_measure: paths must share a grid");
  }
  return {std::move(weights), std::move(paths)};
}

}  // namespace roughmf
