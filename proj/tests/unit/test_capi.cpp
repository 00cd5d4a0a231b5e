#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "roughmf/roughmf.h"

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

namespace fs = std::filesystem;

TEST_CASE("version and errors") {
  CHECK(std::string(rmf_version()).find("roughmf") == 0);
  rmf_config* cfg = nullptr;
  REQUIRE(rmf_config_new(&cfg) == RMF_OK);
  CHECK(rmf_config_set(cfg, "nonsense", "1") == RMF_ERR_INVALID_INPUT);
  CHECK(std::string(rmf_last_error()).find("nonsense") != std::string::npos);
  CHECK(rmf_config_set(nullptr, "grid", "1") == RMF_ERR_INVALID_INPUT);
  CHECK(rmf_set_threads(0) == RMF_ERR_INVALID_INPUT);
  CHECK(rmf_exit_code(RMF_OK) == 0);
  CHECK(rmf_exit_code(RMF_ERR_INVALID_INPUT) == 1);
  CHECK(rmf_exit_code(RMF_ERR_DIVERGENCE) == 2);
  CHECK(rmf_exit_code(RMF_ERR_CHECK_FAILED) == 3);
  char buf[16];
  size_t needed = 0;
  REQUIRE(rmf_config_get(cfg, "grid", buf, sizeof buf, &needed) == RMF_OK);
  CHECK(std::string(buf) == "256");
  CHECK(needed == 4);
  rmf_config_free(cfg);
}

TEST_CASE("paths through the C API") {
  const double pts[] = {0, 0, 1, 0, 1, 1};
  rmf_path* p = nullptr;
  REQUIRE(rmf_path_from_points(pts, 3, 2, nullptr, &p) == RMF_OK);
  CHECK(rmf_path_size(p) == 3);
  CHECK(rmf_path_dim(p) == 2);
  double l1[2], l2[4];
  REQUIRE(rmf_path_value(p, 2, l1, l2) == RMF_OK);
  CHECK(l2[1] == doctest::Approx(1.0));
  CHECK(l2[2] == doctest::Approx(0.0));
  double v = 0;
  REQUIRE(rmf_path_p_variation(p, 1.0, &v) == RMF_OK);
  // the two legs beat the single chord
  CHECK(v == doctest::Approx(2.0));
  REQUIRE(rmf_path_rho(p, p, 2.5, &v) == RMF_OK);
  CHECK(v == 0.0);
  CHECK(rmf_path_value(p, 9, l1, l2) == RMF_ERR_INVALID_INPUT);
  CHECK(rmf_path_m_alpha(p, 2.5, 1e-6, &v) == RMF_ERR_GRID_TOO_COARSE);
  double lhs, rhs;
  int holds = 0;
  REQUIRE(rmf_path_pvar_bound(p, 2.5, 2.0, &lhs, &rhs, &holds) == RMF_OK);
  CHECK(holds == 1);
  rmf_path_free(p);

  rmf_config* cfg = nullptr;
  rmf_config_new(&cfg);
  rmf_config_set(cfg, "grid", "16");
  REQUIRE(rmf_path_sample(cfg, 0, &p) == RMF_OK);
  CHECK(rmf_path_size(p) == 17);
  rmf_path_free(p);
  rmf_config_free(cfg);
}

TEST_CASE("measures through the C API") {
  rmf_config* cfg = nullptr;
  rmf_config_new(&cfg);
  rmf_config_set(cfg, "grid", "16");
  rmf_config_set(cfg, "ensemble", "8");
  rmf_measure* fp = nullptr;
  int it = 0, conv = 0;
  REQUIRE(rmf_measure_fixed_point(cfg, &fp, &it, &conv) == RMF_OK);
  CHECK(conv == 1);
  CHECK(rmf_measure_size(fp) == 8);
  CHECK(rmf_measure_points(fp) == 17);
  CHECK(rmf_measure_state_dim(fp) == 2);
  rmf_measure* ps = nullptr;
  REQUIRE(rmf_measure_particles(cfg, 8, 3, &ps) == RMF_OK);
  double w0 = -1, w1 = -1, wm = -1;
  REQUIRE(rmf_measure_wasserstein(fp, ps, 0, 2.5, &w0) == RMF_OK);
  REQUIRE(rmf_measure_wasserstein(fp, ps, 1, 2.5, &w1) == RMF_OK);
  CHECK(w1 <= w0);
  REQUIRE(rmf_measure_marginal_wasserstein(fp, ps, 16, &wm) == RMF_OK);
  CHECK(wm > 0);
  CHECK(rmf_measure_wasserstein(fp, ps, 5, 2.5, &w0) == RMF_ERR_INVALID_INPUT);
  REQUIRE(rmf_measure_save(fp, "capi_measure.csv") == RMF_OK);
  rmf_measure* back = nullptr;
  REQUIRE(rmf_measure_load("capi_measure.csv", &back) == RMF_OK);
  fs::remove("capi_measure.csv");
  double a[2], b[2];
  rmf_measure_state(fp, 3, 10, a);
  rmf_measure_state(back, 3, 10, b);
  CHECK(a[0] == b[0]);
  CHECK(a[1] == b[1]);
  CHECK(rmf_measure_load("missing.csv", &back) == RMF_ERR_IO);
  rmf_measure_free(back);
  rmf_measure_free(ps);
  rmf_measure_free(fp);
  rmf_config_free(cfg);
}

TEST_CASE("run through the C API") {
  rmf_config* cfg = nullptr;
  rmf_config_new(&cfg);
  rmf_config_set(cfg, "grid", "16");
  char summary[256];
  const fs::path out = "capi_run";
  fs::remove_all(out);
  REQUIRE(rmf_run("lift", cfg, out.string().c_str(), summary, sizeof summary) == RMF_OK);
  CHECK(fs::exists(out / "driver.csv"));
  CHECK(std::string(summary).find("driver 0") == 0);
  rmf_config_set(cfg, "grid", "17");
  fs::remove_all(out);
  CHECK(rmf_run("lift", cfg, out.string().c_str(), summary, sizeof summary) == RMF_ERR_INVALID_INPUT);
  CHECK_FALSE(fs::exists(out));
  rmf_config_free(cfg);
}
