#pragma once

#include "roughmf/chaos_lab.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace roughmf {

// Flat `key = value` experiment description. Every key has a default; keys not
// in the table are rejected.
class ExperimentConfig {
 public:
  ExperimentConfig();

  static ExperimentConfig from_file(const std::string& file);
  // Parses `key = value` lines; '#' starts a comment.
  static ExperimentConfig from_text(const std::string& text);

  void set(const std::string& key, const std::string& value);
  // "key=value"
  void set_assignment(const std::string& assignment);
  const std::string& get(const std::string& key) const;

  double real(const std::string& key) const;
  long long integer(const std::string& key) const;
  std::uint64_t u64(const std::string& key) const;
  std::vector<double> reals(const std::string& key) const;
  std::vector<std::size_t> sizes(const std::string& key) const;

  // Parses every key and cross-checks values; throws InvalidInput.
  void validate() const;

  // Resolved config, one `key = value` per line in key order.
  std::string dump() const;

  static const std::vector<std::string>& keys();

 private:
  bool family_is_corpus() const;

  std::map<std::string, std::string> values_;
};

const char* version_string();

PreferenceSpec build_spec(const ExperimentConfig& cfg);
InitialLaw build_initial_law(const ExperimentConfig& cfg);
VectorFieldSet build_fields(const ExperimentConfig& cfg);
DriftKernel build_kernel(const ExperimentConfig& cfg);
Scenario build_scenario(const ExperimentConfig& cfg);
FixedPointOptions build_fixed_point_options(const ExperimentConfig& cfg);

inline const std::vector<std::string> kCommands = {
    "lift", "solve", "fixed-point", "finite", "chaos", "nu-cont", "check", "mgf"};

// Runs one subcommand, writing its artifacts into out_dir (created after all
// validation). Returns a one-line summary. Throws Error subclasses; a failed
// check raises CheckFailed after the artifacts are written.
std::string run_command(const std::string& command, const ExperimentConfig& cfg,
                        const std::string& out_dir);

}  // namespace roughmf
