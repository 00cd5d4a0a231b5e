#include "roughmf/roughmf.h"

#include <CLI11.hpp>

#include <cinttypes>
#include <cstdio>
#include <string>
#include <vector>

namespace {

int fail(rmf_status st) {
  std::fprintf(stderr, "roughmf: %s\n", rmf_last_error());
  return rmf_exit_code(st);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rough mean-field toolkit: rough paths, McKean-Vlasov RDEs, particle systems"};
  app.set_version_flag("--version", rmf_version());

  std::string command;
  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  int threads = 1;
  std::vector<std::string> overrides;

  app.add_option("command", command,
                 "lift | solve | fixed-point | finite | chaos | nu-cont | check | mgf")
      ->required()
      ->check(CLI::IsMember({"lift", "solve", "fixed-point", "finite", "chaos", "nu-cont",
                             "check", "mgf"}));
  app.add_option("--config", config_path, "key = value config file");
  auto* seed_opt = app.add_option("--seed", seed, "master seed (overrides config)");
  app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--set", overrides, "override a config key, key=value");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  rmf_config* cfg = nullptr;
  rmf_status st = config_path.empty() ? rmf_config_new(&cfg)
                                      : rmf_config_load(config_path.c_str(), &cfg);
  if (st != RMF_OK) return fail(st);
  for (const std::string& kv : overrides) {
    st = rmf_config_set_assignment(cfg, kv.c_str());
    if (st != RMF_OK) {
      rmf_config_free(cfg);
      return fail(st);
    }
  }
  if (*seed_opt) {
    const std::string s = std::to_string(seed);
    rmf_config_set(cfg, "seed", s.c_str());
  }
  st = rmf_set_threads(threads);
  if (st != RMF_OK) {
    rmf_config_free(cfg);
    return fail(st);
  }

  char summary[1024] = {0};
  st = rmf_run(command.c_str(), cfg, out_dir.c_str(), summary, sizeof summary);
  rmf_config_free(cfg);
  if (st != RMF_OK) {
    if (st == RMF_ERR_CHECK_FAILED) std::fprintf(stderr, "roughmf: check failed\n");
    return fail(st);
  }
  std::printf("%s\n", summary);
  return 0;
}
