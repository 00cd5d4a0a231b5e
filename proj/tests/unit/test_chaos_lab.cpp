#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "roughmf/chaos_lab.hpp"
#include "roughmf/error.hpp"
#include "roughmf/fields.hpp"
#include "roughmf/parallel.hpp"

#include <cstdio>
#include <fstream>

using namespace roughmf;

namespace {

Scenario benchmark(std::size_t g = 32) {
  Scenario sc;
  sc.spec.grid_size = g;
  sc.spec.seed = 3;
  sc.u0 = InitialLaw{Vec::Zero(2), 1.0};
  sc.vf = saturated_axis_fields(2, 0.5);
  sc.kernel = linear_attraction_kernel(0.5);
  return sc;
}

std::string slurp(const std::string& f) {
  std::ifstream in(f);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("zero kernel gives solo solves bitwise") {
  Scenario sc = benchmark();
  sc.kernel = zero_kernel();
  const EmpiricalPathMeasure mu = simulate_particle_system(sc, 5, 11);
  PreferenceSpec spec = sc.spec;
  spec.seed = 11;
  for (std::uint64_t i = 0; i < 5; ++i) {
    const SolutionPath solo =
        solve_rde(sc.vf, zero_drift(), sample_driver(spec, i), sample_initial(sc.u0, 11, i), true);
    CHECK((mu.atoms[i].states - solo.states).norm() == 0.0);
    for (std::size_t k = 0; k < solo.size(); ++k)
      CHECK((mu.atoms[i].lift->at(k).lvl2 - solo.lift->at(k).lvl2).norm() == 0.0);
  }
  const EmpiricalPathMeasure one = simulate_particle_system(benchmark(), 1, 11);
  const SolutionPath solo =
      solve_rde(sc.vf, zero_drift(), sample_driver(spec, 0), sample_initial(sc.u0, 11, 0), true);
  CHECK((one.atoms[0].states - solo.states).norm() == 0.0);
}

TEST_CASE("linear kernel without diffusion conserves the mean") {
  Scenario sc = benchmark(64);
  sc.spec.volatility.scale = 0.0;
  const EmpiricalPathMeasure mu = simulate_particle_system(sc, 50, 2);
  const Vec m0 = mu.mean(0);
  for (std::size_t k = 0; k < mu.times().size(); ++k) CHECK((mu.mean(k) - m0).norm() <= 1e-12);
}

TEST_CASE("exchangeability") {
  const Scenario sc = benchmark();
  std::vector<std::uint64_t> ids = {0, 1, 2, 3, 4, 5};
  std::vector<std::uint64_t> perm = {4, 2, 5, 0, 3, 1};
  const EmpiricalPathMeasure a = simulate_particle_system(sc, ids, 7);
  const EmpiricalPathMeasure b = simulate_particle_system(sc, perm, 7);
  for (std::size_t i = 0; i < perm.size(); ++i)
    CHECK((b.atoms[i].states - a.atoms[perm[i]].states).norm() == 0.0);
}

TEST_CASE("particle system is thread-count independent") {
  const Scenario sc = benchmark();
  set_thread_count(1);
  const EmpiricalPathMeasure a = simulate_particle_system(sc, 9, 4);
  set_thread_count(3);
  const EmpiricalPathMeasure b = simulate_particle_system(sc, 9, 4);
  set_thread_count(1);
  for (std::size_t i = 0; i < 9; ++i) CHECK((a.atoms[i].states - b.atoms[i].states).norm() == 0.0);
}

TEST_CASE("sweep against an identical ensemble is zero") {
  Scenario sc = benchmark();
  sc.kernel = zero_kernel();
  const EmpiricalPathMeasure ref = simulate_particle_system(sc, 16, sc.spec.seed);
  ChaosSweepOptions o;
  o.repeats = 2;
  o.fixed_seed = sc.spec.seed;
  o.pathwise_max_n = 16;
  const ChaosSweepResult r = chaos_sweep(sc, {16}, ref, o);
  REQUIRE(r.rows.size() == 2);
  for (const ChaosRow& row : r.rows) {
    CHECK(row.w_marginal == 0.0);
    REQUIRE(row.w_pathwise.has_value());
    CHECK(*row.w_pathwise == 0.0);
  }
}

TEST_CASE("sweep rows, ordering and csv") {
  const Scenario sc = benchmark();
  const EmpiricalPathMeasure ref = simulate_particle_system(sc, 64, 99);
  ChaosSweepOptions o;
  o.repeats = 5;
  o.pathwise_max_n = 4;
  const ChaosSweepResult r = chaos_sweep(sc, {16, 4, 8}, ref, o);
  REQUIRE(r.rows.size() == 15);
  for (std::size_t i = 1; i < r.rows.size(); ++i)
    CHECK(std::make_pair(r.rows[i - 1].n, r.rows[i - 1].repeat) <
          std::make_pair(r.rows[i].n, r.rows[i].repeat));
  for (const ChaosRow& row : r.rows) {
    CHECK(row.w_marginal > 0.0);
    CHECK(row.w_pathwise.has_value() == (row.n <= 4));
  }
  write_chaos_csv(r, "chaos_test.csv");
  const std::string text = slurp("chaos_test.csv");
  std::remove("chaos_test.csv");
  CHECK(text.rfind("N,repeat,seed,w_marginal,w_pathwise,seconds\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 16);
  CHECK_THROWS_AS(chaos_sweep(sc, {128}, ref, o), InvalidInput);
  Scenario other = sc;
  other.spec.grid_size = 64;
  CHECK_THROWS_AS(chaos_sweep(other, {4}, ref, o), InvalidInput);
}

TEST_CASE("medians and slope") {
  ChaosSweepResult r;
  for (std::size_t n : {8u, 16u, 32u})
    for (int k = 0; k < 3; ++k) r.rows.push_back(ChaosRow{n, k, 0, (1.0 + k) / std::sqrt(double(n)), {}, 0});
  const auto med = median_by_n(r);
  REQUIRE(med.size() == 3);
  CHECK(med[0].second == doctest::Approx(2.0 / std::sqrt(8.0)));
  CHECK(log_log_slope(med) == doctest::Approx(-0.5));
}

TEST_CASE("nu continuity") {
  Scenario sc = benchmark();
  FixedPointOptions o;
  const NuPerturbation r = nu_continuity_experiment(sc, {0.0, 0.2, 0.1, 0.05}, 20, o);
  REQUIRE(r.rows.size() == 4);
  CHECK(r.rows[0].distance <= 2 * o.tol);
  CHECK(r.decreasing_as_eps_shrinks);
  CHECK(r.converged);
  // drift-free linear case: distance close to linear in eps
  Scenario lin = sc;
  lin.kernel = zero_kernel();
  lin.vf = constant_fields(Mat::Identity(2, 2));
  const NuPerturbation q = nu_continuity_experiment(lin, {0.02, 0.01}, 10, o);
  CHECK(q.rows[0].distance / q.rows[1].distance == doctest::Approx(2.0).epsilon(0.05));
  write_nu_csv(q, "nu_test.csv");
  CHECK(slurp("nu_test.csv").rfind("eps,distance\n", 0) == 0);
  std::remove("nu_test.csv");
  CHECK_THROWS_AS(nu_continuity_experiment(sc, {-0.1}, 5, o), InvalidInput);
}

TEST_CASE("structure checks") {
  const Scenario sc = benchmark(64);
  StructureCheckOptions o;
  o.probes = 20;
  o.seeds = 2;
  o.bound_samples = 10;
  const StructureReport r = structure_checks(sc, o);
  for (const CheckLine& l : r.lines) {
    INFO(l.name);
    CHECK(l.pass);
  }
  CHECK(r.all_pass());
  CHECK(extension_defect(sc, 3, 17) <= 1e-10);
  write_structure_report(r, "structure_test.txt");
  const std::string text = slurp("structure_test.txt");
  std::remove("structure_test.txt");
  CHECK(text.find("overall\tPASS") != std::string::npos);
  // A commuting system cannot produce a visible same-block bracket.
  Scenario flat = sc;
  Mat a1 = Mat::Identity(2, 2);
  flat.vf = linear_fields({a1, 2 * a1});
  const StructureReport f = structure_checks(flat, o);
  CHECK_FALSE(f.all_pass());
}
