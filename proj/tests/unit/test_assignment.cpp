#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "roughmf/assignment.hpp"

#include <set>

using namespace roughmf;

TEST_CASE("assignment matches permutation brute force") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 10);
  for (int n = 1; n <= 7; ++n) {
    for (int t = 0; t < 30; ++t) {
      Eigen::MatrixXd c(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) c(i, j) = t % 2 ? std::floor(u(rng)) : u(rng);
      const Assignment a = solve_assignment(c);
      CHECK(a.cost == doctest::Approx(oracle::brute_assignment(c)).epsilon(1e-12));
      std::set<int> cols(a.row_to_col.begin(), a.row_to_col.end());
      CHECK(cols.size() == static_cast<std::size_t>(n));
      double s = 0;
      for (int i = 0; i < n; ++i) s += c(i, a.row_to_col[i]);
      CHECK(s == doctest::Approx(a.cost));
    }
  }
}

TEST_CASE("two point masses") {
  Eigen::MatrixXd c(2, 2);
  c << 1, 5, 2, 1.5;
  CHECK(solve_assignment(c).cost == doctest::Approx(2.5));
}

TEST_CASE("identity cost") {
  const Eigen::MatrixXd c = Eigen::MatrixXd::Ones(50, 50) - Eigen::MatrixXd::Identity(50, 50);
  CHECK(solve_assignment(c).cost == 0.0);
}
