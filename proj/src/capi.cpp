#include "roughmf/roughmf.h"

#include "roughmf/config.hpp"
#include "roughmf/error.hpp"
#include "roughmf/parallel.hpp"
#include "roughmf/path_metrics.hpp"

#include <cstring>
#include <new>
#include <string>

struct rmf_config {
  roughmf::ExperimentConfig cfg;
};

struct rmf_path {
  roughmf::RoughPathGrid path;
};

struct rmf_measure {
  roughmf::EmpiricalPathMeasure mu;
};

namespace {

thread_local std::string last_error;

rmf_status status_of(roughmf::ErrorCode c) {
  switch (c) {
    case roughmf::ErrorCode::kInvalidInput: return RMF_ERR_INVALID_INPUT;
    case roughmf::ErrorCode::kInvalidElement: return RMF_ERR_INVALID_ELEMENT;
    case roughmf::ErrorCode::kGridTooCoarse: return RMF_ERR_GRID_TOO_COARSE;
    case roughmf::ErrorCode::kDivergence: return RMF_ERR_DIVERGENCE;
    case roughmf::ErrorCode::kIo: return RMF_ERR_IO;
    case roughmf::ErrorCode::kCheckFailed: return RMF_ERR_CHECK_FAILED;
  }
  return RMF_ERR_INTERNAL;
}

template <class F>
rmf_status guard(F&& f) {
  try {
    f();
    last_error.clear();
    return RMF_OK;
  } catch (const roughmf::Error& e) {
    last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
  } catch (const std::exception& e) {
    last_error = e.what();
  } catch (...) {
    last_error = "unknown error";
  }
  return RMF_ERR_INTERNAL;
}

void need(const void* p, const char* what) {
  if (!p) throw roughmf::InvalidInput(std::string(what) + " is NULL");
}

void copy_out(const std::string& s, char* buf, size_t len) {
  if (!buf || len == 0) return;
  const size_t n = std::min(len - 1, s.size());
  std::memcpy(buf, s.data(), n);
  buf[n] = '\0';
}

}  // namespace

extern "C" {

const char* rmf_version(void) { return roughmf::version_string(); }

const char* rmf_last_error(void) { return last_error.c_str(); }

int rmf_exit_code(rmf_status status) {
  switch (status) {
    case RMF_OK: return 0;
    case RMF_ERR_DIVERGENCE: return 2;
    case RMF_ERR_CHECK_FAILED: return 3;
    default: return 1;
  }
}

rmf_status rmf_set_threads(int threads) {
  return guard([&] {
    if (threads < 1) throw roughmf::InvalidInput("thread count must be >= 1");
    roughmf::set_thread_count(threads);
  });
}

rmf_status rmf_config_new(rmf_config** out) {
  return guard([&] {
    need(out, "out");
    *out = new rmf_config{};
  });
}

rmf_status rmf_config_load(const char* file, rmf_config** out) {
  return guard([&] {
    need(file, "file");
    need(out, "out");
    *out = new rmf_config{roughmf::ExperimentConfig::from_file(file)};
  });
}

rmf_status rmf_config_set(rmf_config* cfg, const char* key, const char* value) {
  return guard([&] {
    need(cfg, "cfg");
    need(key, "key");
    need(value, "value");
    cfg->cfg.set(key, value);
  });
}

rmf_status rmf_config_set_assignment(rmf_config* cfg, const char* assignment) {
  return guard([&] {
    need(cfg, "cfg");
    need(assignment, "assignment");
    cfg->cfg.set_assignment(assignment);
  });
}

rmf_status rmf_config_get(const rmf_config* cfg, const char* key, char* buf,
                          size_t len, size_t* needed) {
  return guard([&] {
    need(cfg, "cfg");
    need(key, "key");
    const std::string& v = cfg->cfg.get(key);
    if (needed) *needed = v.size() + 1;
    copy_out(v, buf, len);
  });
}

rmf_status rmf_config_validate(const rmf_config* cfg) {
  return guard([&] {
    need(cfg, "cfg");
    cfg->cfg.validate();
  });
}

void rmf_config_free(rmf_config* cfg) { delete cfg; }

rmf_status rmf_run(const char* command, const rmf_config* cfg,
                   const char* out_dir, char* summary, size_t summary_len) {
  return guard([&] {
    need(command, "command");
    need(cfg, "cfg");
    need(out_dir, "out_dir");
    try {
      copy_out(roughmf::run_command(command, cfg->cfg, out_dir), summary,
               summary_len);
    } catch (const roughmf::CheckFailed& e) {
      copy_out(e.what(), summary, summary_len);
      throw;
    }
  });
}

rmf_status rmf_path_from_points(const double* points, size_t n_points, int dim,
                                const double* times, rmf_path** out) {
  return guard([&] {
    need(points, "points");
    need(out, "out");
    if (dim < 1) throw roughmf::InvalidInput("dim must be >= 1");
    roughmf::Mat pts(static_cast<Eigen::Index>(n_points), dim);
    for (size_t k = 0; k < n_points; ++k)
      for (int i = 0; i < dim; ++i)
        pts(static_cast<Eigen::Index>(k), i) = points[k * static_cast<size_t>(dim) + i];
    std::span<const double> t;
    if (times) t = std::span<const double>(times, n_points);
    *out = new rmf_path{roughmf::signature_pl(pts, 2, t)};
  });
}

rmf_status rmf_path_sample(const rmf_config* cfg, uint64_t index, rmf_path** out) {
  return guard([&] {
    need(cfg, "cfg");
    need(out, "out");
    *out = new rmf_path{roughmf::sample_driver(roughmf::build_spec(cfg->cfg), index)};
  });
}

size_t rmf_path_size(const rmf_path* path) { return path ? path->path.size() : 0; }

int rmf_path_dim(const rmf_path* path) { return path ? path->path.dim() : 0; }

rmf_status rmf_path_value(const rmf_path* path, size_t k, double* lvl1, double* lvl2) {
  return guard([&] {
    need(path, "path");
    if (k >= path->path.size()) throw roughmf::InvalidInput("grid index out of range");
    if (lvl1) {
      const auto v = path->path.lvl1(k);
      std::copy(v.begin(), v.end(), lvl1);
    }
    if (lvl2) {
      if (path->path.level() != 2) throw roughmf::InvalidInput("path has no level 2");
      const auto v = path->path.lvl2(k);
      std::copy(v.begin(), v.end(), lvl2);
    }
  });
}

rmf_status rmf_path_p_variation(const rmf_path* path, double p, double* out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = roughmf::p_variation(path->path, p);
  });
}

rmf_status rmf_path_m_alpha(const rmf_path* path, double p, double alpha, double* out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = roughmf::m_alpha(path->path, p, alpha);
  });
}

rmf_status rmf_path_rho(const rmf_path* a, const rmf_path* b, double p, double* out) {
  return guard([&] {
    need(a, "a");
    need(b, "b");
    need(out, "out");
    *out = roughmf::rho_p_var(a->path, b->path, p);
  });
}

rmf_status rmf_path_pvar_bound(const rmf_path* path, double p, double alpha,
                               double* lhs, double* rhs, int* holds) {
  return guard([&] {
    need(path, "path");
    const roughmf::PvarBoundReport r = roughmf::pvar_bound_check(path->path, p, alpha);
    if (lhs) *lhs = r.lhs;
    if (rhs) *rhs = r.rhs;
    if (holds) *holds = r.holds ? 1 : 0;
  });
}

void rmf_path_free(rmf_path* path) { delete path; }

rmf_status rmf_measure_fixed_point(const rmf_config* cfg, rmf_measure** out,
                                   int* iterations, int* converged) {
  return guard([&] {
    need(cfg, "cfg");
    need(out, "out");
    cfg->cfg.validate();
    const roughmf::Scenario sc = roughmf::build_scenario(cfg->cfg);
    const auto ens = roughmf::make_ensemble(
        sc.spec, sc.u0, static_cast<std::size_t>(cfg->cfg.integer("ensemble")));
    roughmf::FixedPointReport rep = roughmf::fixed_point(
        ens, sc.vf, sc.kernel, roughmf::build_fixed_point_options(cfg->cfg));
    if (iterations) *iterations = rep.iterations;
    if (converged) *converged = rep.converged ? 1 : 0;
    *out = new rmf_measure{std::move(rep.measure)};
  });
}

rmf_status rmf_measure_particles(const rmf_config* cfg, size_t n, uint64_t seed,
                                 rmf_measure** out) {
  return guard([&] {
    need(cfg, "cfg");
    need(out, "out");
    cfg->cfg.validate();
    const roughmf::Scenario sc = roughmf::build_scenario(cfg->cfg);
    *out = new rmf_measure{roughmf::simulate_particle_system(sc, n, seed)};
  });
}

rmf_status rmf_measure_load(const char* file, rmf_measure** out) {
  return guard([&] {
    need(file, "file");
    need(out, "out");
    *out = new rmf_measure{roughmf::load_ensemble_csv(file)};
  });
}

rmf_status rmf_measure_save(const rmf_measure* mu, const char* file) {
  return guard([&] {
    need(mu, "mu");
    need(file, "file");
    roughmf::save_ensemble_csv(mu->mu, file);
  });
}

size_t rmf_measure_size(const rmf_measure* mu) { return mu ? mu->mu.size() : 0; }

size_t rmf_measure_points(const rmf_measure* mu) {
  return mu && mu->mu.size() ? mu->mu.times().size() : 0;
}

int rmf_measure_state_dim(const rmf_measure* mu) {
  return mu && mu->mu.size() ? mu->mu.atoms.front().state_dim() : 0;
}

rmf_status rmf_measure_state(const rmf_measure* mu, size_t atom, size_t k, double* out) {
  return guard([&] {
    need(mu, "mu");
    need(out, "out");
    if (atom >= mu->mu.size() || k >= mu->mu.atoms[atom].size())
      throw roughmf::InvalidInput("atom or grid index out of range");
    const roughmf::Vec y = mu->mu.atoms[atom].y(k);
    std::copy(y.data(), y.data() + y.size(), out);
  });
}

rmf_status rmf_measure_wasserstein(const rmf_measure* a, const rmf_measure* b, int mode,
                                   double p, double* out) {
  return guard([&] {
    need(a, "a");
    need(b, "b");
    need(out, "out");
    if (mode != 0 && mode != 1) throw roughmf::InvalidInput("mode must be 0 or 1");
    *out = roughmf::wasserstein(a->mu, b->mu,
                                mode == 0 ? roughmf::CouplingMode::kSameIndex
                                          : roughmf::CouplingMode::kAssignment,
                                p);
  });
}

rmf_status rmf_measure_marginal_wasserstein(const rmf_measure* a, const rmf_measure* b,
                                            size_t k, double* out) {
  return guard([&] {
    need(a, "a");
    need(b, "b");
    need(out, "out");
    *out = roughmf::marginal_wasserstein(a->mu, b->mu, k);
  });
}

void rmf_measure_free(rmf_measure* mu) { delete mu; }

}  // extern "C"
