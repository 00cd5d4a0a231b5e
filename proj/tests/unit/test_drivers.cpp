#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "roughmf/drivers.hpp"
#include "roughmf/error.hpp"

#include <cstdio>
#include <fstream>

using namespace roughmf;

namespace {

double levy_area(const RoughPathGrid& x) {
  const auto l2 = x.lvl2(x.size() - 1);
  return 0.5 * (l2[1] - l2[2]);
}

struct Moments {
  double mean = 0, var = 0, se_mean = 0, se_var = 0;
};

Moments moments(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  Moments m;
  for (double x : v) m.mean += x / n;
  double m4 = 0;
  for (double x : v) {
    m.var += (x - m.mean) * (x - m.mean) / (n - 1);
    m4 += std::pow(x - m.mean, 4) / n;
  }
  m.se_mean = std::sqrt(m.var / n);
  m.se_var = std::sqrt(std::max(0.0, m4 - m.var * m.var) / n);
  return m;
}

}  // namespace

TEST_CASE("zero volatility gives the constant path") {
  PreferenceSpec spec;
  spec.grid_size = 16;
  spec.volatility.scale = 0.0;
  const RoughPathGrid x = sample_driver(spec, 3);
  for (std::size_t k = 0; k < x.size(); ++k) CHECK(x.at(k).is_identity());
}

TEST_CASE("sampling is a function of seed and index") {
  PreferenceSpec spec;
  spec.grid_size = 32;
  spec.seed = 9;
  const Mat a = sample_points(spec, 4), b = sample_points(spec, 4), c = sample_points(spec, 5);
  CHECK((a - b).norm() == 0.0);
  CHECK((a - c).norm() > 0.0);
  spec.seed = 10;
  CHECK((sample_points(spec, 4) - a).norm() > 0.0);
}

TEST_CASE("Brownian Levy area against a finer-grid Monte Carlo") {
  PreferenceSpec coarse;
  coarse.grid_size = 16;
  coarse.seed = 11;
  PreferenceSpec fine = coarse;
  fine.grid_size = 64;
  fine.seed = 12;
  std::vector<double> ac, af;
  for (std::uint64_t i = 0; i < 2000; ++i) {
    ac.push_back(levy_area(sample_driver(coarse, i)));
    af.push_back(levy_area(sample_driver(fine, i)));
  }
  const Moments mc = moments(ac), mf = moments(af);
  CHECK(std::abs(mc.mean) <= 3 * mc.se_mean);
  CHECK(std::abs(mf.mean) <= 3 * mf.se_mean);
  // The piecewise-linear lift loses area variance like 1/G; both grids must
  // agree with each other and with T^2/4 (1 - 1/G) inside the band.
  const double band = 3 * std::hypot(mc.se_var, mf.se_var);
  CHECK(std::abs(mc.var - mf.var) <= band + 0.25 * (1.0 / 16 - 1.0 / 64));
  CHECK(std::abs(mc.var - 0.25 * (1 - 1.0 / 16)) <= 3 * mc.se_var);
  CHECK(std::abs(mf.var - 0.25 * (1 - 1.0 / 64)) <= 3 * mf.se_var);
}

TEST_CASE("fractional covariance") {
  PreferenceSpec spec;
  spec.family = DriverFamily::kFractional;
  spec.hurst = 0.4;
  spec.grid_size = 8;
  spec.dim = 1;
  spec.seed = 13;
  const int n = 6000;
  std::vector<Mat> pts;
  for (int i = 0; i < n; ++i) pts.push_back(sample_points(spec, static_cast<std::uint64_t>(i)));
  const double twoh = 2 * spec.hurst;
  for (int s = 1; s <= 8; s += 3) {
    for (int t = s; t <= 8; t += 2) {
      const double ts = s / 8.0, tt = t / 8.0;
      const double exact = 0.5 * (std::pow(ts, twoh) + std::pow(tt, twoh) - std::pow(tt - ts, twoh));
      std::vector<double> prod;
      for (const Mat& p : pts) prod.push_back(p(s, 0) * p(t, 0));
      const Moments m = moments(prod);
      CHECK(std::abs(m.mean - exact) <= 3.5 * m.se_mean);
    }
  }
}

TEST_CASE("Hurst one is a random straight line") {
  PreferenceSpec spec;
  spec.family = DriverFamily::kFractional;
  spec.hurst = 1.0;
  spec.grid_size = 8;
  const Mat p = sample_points(spec, 0);
  for (int k = 1; k <= 8; ++k) CHECK((p.row(k) - (k / 8.0) * p.row(8)).norm() < 1e-12);
}

TEST_CASE("PreferenceSpec validation") {
  PreferenceSpec spec;
  spec.grid_size = 100;
  CHECK_THROWS_AS(spec.validate(), InvalidInput);
  spec.grid_size = 64;
  spec.family = DriverFamily::kFractional;
  spec.hurst = 0.3;
  CHECK_THROWS_AS(spec.validate(), InvalidInput);
  spec.hurst = 0.4;
  CHECK_NOTHROW(spec.validate());
}

TEST_CASE("sup-normalized volatility") {
  PreferenceSpec spec;
  spec.grid_size = 64;
  spec.volatility.kind = VolatilityRule::Kind::kSupNormalized;
  for (std::uint64_t i = 0; i < 20; ++i) {
    const RoughPathGrid x = sample_driver(spec, i);
    double sup = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      const auto v = x.lvl1(k);
      sup = std::max(sup, std::hypot(v[0], v[1]));
    }
    CHECK(sup <= 1.0 + 1e-12);
    CHECK(sup >= 1.0 - 1e-12);
  }
}

TEST_CASE("per-individual volatility") {
  PreferenceSpec spec;
  spec.grid_size = 16;
  const RoughPathGrid base = sample_driver(spec, 2);
  spec.volatility.kind = VolatilityRule::Kind::kPerIndividual;
  spec.volatility.per_individual = [](std::uint64_t i) { return 0.5 * static_cast<double>(i); };
  const RoughPathGrid x = sample_driver(spec, 2);
  CHECK(x.lvl1(16)[0] == doctest::Approx(base.lvl1(16)[0]));
  CHECK(x.lvl2(16)[1] == doctest::Approx(base.lvl2(16)[1]));
}

TEST_CASE("joint lift") {
  std::mt19937_64 rng(14);
  const RoughPathGrid a = signature_pl(oracle::random_walk(3, 2, rng), 2);
  CHECK(joint_lift(std::span(&a, 1), JointLiftPolicy::kZeroCrossArea).lvl2(2)[1] == a.lvl2(2)[1]);

  // two single segments: no cross area either way
  Mat s1(2, 2), s2(2, 2);
  s1 << 0, 0, 1, 2;
  s2 << 0, 0, -1, 0.5;
  std::vector<RoughPathGrid> lines = {signature_pl(s1, 2), signature_pl(s2, 2)};
  const RoughPathGrid z = joint_lift(lines, JointLiftPolicy::kZeroCrossArea);
  const RoughPathGrid j = joint_lift(lines, JointLiftPolicy::kJointPiecewiseLinear);
  for (std::size_t k = 0; k < 2; ++k) CHECK((z.at(k).lvl2 - j.at(k).lvl2).norm() < 1e-15);

  // two 2-segment paths
  const Mat p1 = oracle::random_walk(3, 2, rng), p2 = oracle::random_walk(3, 2, rng);
  std::vector<RoughPathGrid> paths = {signature_pl(p1, 2), signature_pl(p2, 2)};
  const GroupElement gz = joint_lift(paths, JointLiftPolicy::kZeroCrossArea).at(2);
  const GroupElement gj = joint_lift(paths, JointLiftPolicy::kJointPiecewiseLinear).at(2);
  Mat joint(3, 4);
  joint << p1, p2;
  const Mat riemann = oracle::riemann_lvl2(joint, 4096);
  CHECK(is_group_like(gz));
  CHECK(is_group_like(gj));
  // diagonal blocks copied exactly
  CHECK((gz.lvl2.block(0, 0, 2, 2) - paths[0].at(2).lvl2).norm() == 0.0);
  CHECK((gj.lvl2.block(2, 2, 2, 2) - paths[1].at(2).lvl2).norm() == 0.0);
  const Mat diff = gj.lvl2 - gz.lvl2;
  const Mat x1 = gz.lvl1.head(2), x2 = gz.lvl1.tail(2);
  // cross Levy area of the oracle = antisymmetric part of the difference
  const Mat expected = riemann.block(0, 2, 2, 2) - 0.5 * x1 * x2.transpose();
  CHECK((diff.block(0, 2, 2, 2) - expected).norm() < 1e-8);
  CHECK((diff.block(0, 2, 2, 2) + diff.block(2, 0, 2, 2).transpose()).norm() < 1e-14);
  CHECK(diff.block(0, 2, 2, 2).norm() > 1e-3);
}

TEST_CASE("joint lift rejects mismatched grids") {
  std::vector<RoughPathGrid> ps = {RoughPathGrid::constant(uniform_times(4, 1.0), 2, 2),
                                   RoughPathGrid::constant(uniform_times(8, 1.0), 2, 2)};
  CHECK_THROWS_AS(joint_lift(ps, JointLiftPolicy::kZeroCrossArea), InvalidInput);
}

TEST_CASE("discrete measures") {
  const RoughPathGrid c = RoughPathGrid::constant(uniform_times(4, 1.0), 2, 2);
  CHECK(discrete_measure({1.0}, {c}).expectation([](const RoughPathGrid&) { return 2.0; }) == 2.0);
  CHECK_THROWS_AS(discrete_measure({1.5, -0.5}, {c, c}), InvalidInput);
  CHECK_THROWS_AS(discrete_measure({0.5, 0.6}, {c, c}), InvalidInput);
  CHECK_THROWS_AS(discrete_measure({0.5}, {c, c}), InvalidInput);
}

TEST_CASE("corpus drivers") {
  const std::string file = "corpus_test.csv";
  {
    std::ofstream out(file);
    out << "path,t,x1,x2\n";
    for (int p = 0; p < 2; ++p)
      for (int k = 0; k <= 4; ++k) out << p << "," << k / 4.0 << "," << (p + 1) * k << "," << -k * k << "\n";
  }
  auto corpus = std::make_shared<const PathCorpus>(read_corpus_csv(file));
  std::remove(file.c_str());
  CHECK(corpus->paths.size() == 2);
  PreferenceSpec spec;
  spec.family = DriverFamily::kCorpus;
  spec.grid_size = 4;
  spec.corpus = corpus;
  const RoughPathGrid x = sample_driver(spec, 1);
  CHECK(x.lvl1(4)[0] == doctest::Approx(8.0));
  CHECK(x.lvl1(4)[1] == doctest::Approx(-16.0));
  CHECK(is_group_like(x.at(4)));
  CHECK_THROWS_AS(read_corpus_csv("does_not_exist.csv"), IoError);
}
