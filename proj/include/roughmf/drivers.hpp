#pragma once

#include "roughmf/rough_path.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace roughmf {

// Counter-based seed derivation: distinct (seed, index, stream) triples give
// independent generator states, so ensembles can be sampled in any order.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index,
                       std::uint64_t stream);

enum class RngStream : std::uint64_t {
  kDriver = 1,
  kInitial = 2,
  kSubsample = 3,
  kWeights = 4,
  kProbe = 5,
};

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t index,
                         RngStream stream);

enum class DriverFamily { kBrownian, kFractional, kCorpus };

struct VolatilityRule {
  enum class Kind { kConstant, kPerIndividual, kSupNormalized };
  Kind kind = Kind::kConstant;
  // Constant: sigma = scale. SupNormalized: sigma = scale / sup_t |x_t|.
  double scale = 1.0;
  // PerIndividual: sigma = scale * per_individual(index).
  std::function<double(std::uint64_t)> per_individual;
};

// Sampled level-1 paths read from CSV; every path uses `times`.
struct PathCorpus {
  std::vector<double> times;
  std::vector<Mat> paths;  // (times.size()) x dim each
};

// CSV with header "path,t,x1,...,xd", one row per (path, time), rows of a path
// contiguous and in time order. All paths must share the time column.
PathCorpus read_corpus_csv(const std::string& file);

struct PreferenceSpec {
  DriverFamily family = DriverFamily::kBrownian;
  double hurst = 0.5;  // fractional only, in (1/3, 1]
  int dim = 2;
  double horizon = 1.0;
  std::size_t grid_size = 256;  // number of steps, a power of two
  VolatilityRule volatility;
  std::uint64_t seed = 0;
  double p = 2.5;  // regularity recorded on sampled paths
  std::shared_ptr<const PathCorpus> corpus;

  void validate() const;
};

// Underlying level-1 sample (grid_size + 1) x dim, before volatility scaling.
Mat sample_points(const PreferenceSpec& spec, std::uint64_t index);

// Geometric step-2 lift of the sampled path, dilated by the volatility rule.
RoughPathGrid sample_driver(const PreferenceSpec& spec, std::uint64_t index);

// Volatility multiplier sigma(omega) for an already sampled level-1 path.
double volatility_of(const PreferenceSpec& spec, std::uint64_t index,
                     const Mat& points);

enum class JointLiftPolicy { kZeroCrossArea, kJointPiecewiseLinear };

// Lift of N paths in R^d to one path in R^{Nd}. Diagonal level-2 blocks are
// copied from the inputs; cross blocks carry the forced symmetric part plus an
// antisymmetric part chosen by the policy.
RoughPathGrid joint_lift(std::span<const RoughPathGrid> paths,
                         JointLiftPolicy policy);

struct DiscretePreferenceMeasure {
  std::vector<double> weights;
  std::vector<RoughPathGrid> paths;

  // Sum_i weights[i] * f(paths[i]), accumulated in index order.
  double expectation(const std::function<double(const RoughPathGrid&)>& f) const;
};

DiscretePreferenceMeasure discrete_measure(std::vector<double> weights,
                                           std::vector<RoughPathGrid> paths);

}  // namespace roughmf
