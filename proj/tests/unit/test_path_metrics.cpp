#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "roughmf/drivers.hpp"
#include "roughmf/error.hpp"
#include "roughmf/parallel.hpp"
#include "roughmf/path_metrics.hpp"

using namespace roughmf;

namespace {

RoughPathGrid scalar_path(std::vector<double> values) {
  Mat pts(static_cast<Eigen::Index>(values.size()), 1);
  for (std::size_t k = 0; k < values.size(); ++k) pts(static_cast<Eigen::Index>(k), 0) = values[k];
  return signature_pl(pts, 1);
}

}  // namespace

TEST_CASE("constant path has zero variation") {
  const RoughPathGrid c = RoughPathGrid::constant(uniform_times(8, 1.0), 2, 2);
  CHECK(p_variation(c, 2.5) == 0.0);
  CHECK(m_alpha(c, 2.5, 1.0) == 0.0);
}

TEST_CASE("monotone scalar path") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<double> v = {0};
  for (int k = 0; k < 9; ++k) v.push_back(v.back() + u(rng));
  const RoughPathGrid x = scalar_path(v);
  for (double p : {1.0, 1.5, 2.5}) {
    CHECK(p_variation(x, p) == doctest::Approx(std::pow(v.back(), p)).epsilon(1e-13));
    CHECK(p_variation(x, p) == doctest::Approx(oracle::pvar(x, p, 0, 9)).epsilon(1e-13));
  }
}

TEST_CASE("zig-zag") {
  CHECK(p_variation(scalar_path({0, 1, 0}), 1.0) == doctest::Approx(2.0));
}

TEST_CASE("p below one is rejected") {
  CHECK_THROWS_AS(p_variation(scalar_path({0, 1}), 0.5), InvalidInput);
}

TEST_CASE("DP matches enumeration on small random grids") {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> len(2, 12);
  std::uniform_real_distribution<double> pu(1.0, 2.9);
  for (int t = 0; t < 60; ++t) {
    const int n = len(rng);
    const double p = pu(rng);
    const RoughPathGrid x = signature_pl(oracle::random_walk(n, 2, rng), 2);
    const RoughPathGrid y = signature_pl(oracle::random_walk(n, 2, rng), 2);
    const double ref = oracle::pvar(x, p, 0, n - 1);
    CHECK(std::abs(p_variation(x, p) - ref) <= 1e-12 * std::max(1.0, ref));
    const ControlTable tab = build_control_table(x, p);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        CHECK(std::abs(tab(i, j) - oracle::pvar(x, p, i, j)) <= 1e-12 * std::max(1.0, tab(i, j)));
    const double rref = oracle::rho(x, y, p);
    CHECK(std::abs(rho_p_var(x, y, p) - rref) <= 1e-12 * std::max(1.0, rref));
    double max_step = 0.0;
    for (int k = 0; k + 1 < n; ++k) max_step = std::max(max_step, tab(k, k + 1));
    // slightly above the largest step so both sides agree on admissibility
    const double alpha =
        max_step * (1 + 1e-9) + 0.5 * (tab(0, n - 1) - max_step) * (t % 3) / 2.0;
    const double mref = oracle::m_alpha(x, p, alpha);
    CHECK(std::abs(m_alpha(x, p, alpha) - mref) <= 1e-12 * std::max(1.0, mref));
  }
}

TEST_CASE("control table is superadditive and zero on the diagonal") {
  std::mt19937_64 rng(3);
  const RoughPathGrid x = signature_pl(oracle::random_walk(40, 2, rng, 0.2), 2);
  const ControlTable t = build_control_table(x, 2.5);
  for (std::size_t i = 0; i < t.size(); ++i) {
    CHECK(t(i, i) == 0.0);
    for (std::size_t k = i + 1; k < t.size(); ++k)
      for (std::size_t j = k + 1; j < t.size(); ++j)
        REQUIRE(t(i, k) + t(k, j) <= t(i, j) * (1 + 1e-12));
  }
}

TEST_CASE("table fill is independent of thread count") {
  std::mt19937_64 rng(4);
  const RoughPathGrid x = signature_pl(oracle::random_walk(65, 3, rng, 0.1), 2);
  set_thread_count(1);
  const ControlTable a = build_control_table(x, 2.5);
  set_thread_count(4);
  const ControlTable b = build_control_table(x, 2.5);
  set_thread_count(1);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j) REQUIRE(a(i, j) == b(i, j));
}

TEST_CASE("m_alpha properties") {
  std::mt19937_64 rng(5);
  const RoughPathGrid x = signature_pl(oracle::random_walk(30, 2, rng, 0.3), 2);
  const ControlTable t = build_control_table(x, 2.5);
  double max_step = 0.0;
  for (std::size_t k = 0; k + 1 < t.size(); ++k) max_step = std::max(max_step, t(k, k + 1));
  double prev = 0.0;
  for (double a = max_step; a < 2 * t(0, 29); a *= 1.5) {
    const double m = m_alpha(t, a);
    CHECK(m >= prev);
    CHECK(m <= t(0, 29) * (1 + 1e-12));
    prev = m;
  }
  CHECK(m_alpha(t, t(0, 29)) == doctest::Approx(t(0, 29)));
  CHECK_THROWS_AS(m_alpha(t, 0.5 * max_step), GridTooCoarse);
  try {
    m_alpha(t, 0.5 * max_step);
  } catch (const GridTooCoarse& e) {
    CHECK(e.omega() > 0.5 * max_step);
  }
}

TEST_CASE("rho properties") {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 20; ++t) {
    const RoughPathGrid a = signature_pl(oracle::random_walk(15, 2, rng), 2);
    const RoughPathGrid b = signature_pl(oracle::random_walk(15, 2, rng), 2);
    const RoughPathGrid c = signature_pl(oracle::random_walk(15, 2, rng), 2);
    CHECK(rho_p_var(a, a, 2.5) == 0.0);
    CHECK(rho_p_var(a, c, 2.5) <= rho_p_var(a, b, 2.5) + rho_p_var(b, c, 2.5) + 1e-12);
  }
  // Level-1 gap g(t) monotone, p = 1: |g(T) - g(0)| + |g(0)|.
  const RoughPathGrid x = scalar_path({0, 1, 3, 2, 5});
  const RoughPathGrid y = scalar_path({0, 0.5, 2, 0.5, 3});
  CHECK(rho_p_var(x, y, 1.0, 0.25) == doctest::Approx(2.0 + 0.25));
  CHECK_THROWS_AS(rho_p_var(x, scalar_path({0, 1, 2}), 1.0), InvalidInput);
  const RoughPathGrid one = RoughPathGrid::constant(x.times(), 1, 1);
  CHECK(rho_p_var(x, one, 1.0) == doctest::Approx(p_variation(x, 1.0)));
}

TEST_CASE("p-var bound") {
  const RoughPathGrid c = RoughPathGrid::constant(uniform_times(4, 1.0), 2, 2);
  const PvarBoundReport r = pvar_bound_check(c, 2.5, 1.0);
  CHECK(r.lhs == 0.0);
  CHECK(r.rhs == doctest::Approx(std::pow(2.0, 1.5)));
  CHECK(r.holds);
  // single step with omega(0, T) = alpha
  const RoughPathGrid s = scalar_path({0, 1.3});
  const double alpha = std::pow(1.3, 2.5);
  const PvarBoundReport q = pvar_bound_check(s, 2.5, alpha);
  CHECK(q.lhs == doctest::Approx(alpha));
  CHECK(q.m_alpha == doctest::Approx(alpha));
  CHECK(q.rhs == doctest::Approx(std::pow(2.0, 1.5) * alpha));
  PreferenceSpec spec;
  spec.grid_size = 128;
  for (std::uint64_t i = 0; i < 10; ++i) CHECK(pvar_bound_check(sample_driver(spec, i), 2.5, 1.0).holds);
}

TEST_CASE("table size cap") {
  CHECK_THROWS_AS(build_control_table(RoughPathGrid::constant(uniform_times(1024, 1.0), 1, 2), 2.5),
                  InvalidInput);
}
