#include "roughmf/config.hpp"

#include "roughmf/error.hpp"
#include "roughmf/fields.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace roughmf {

namespace {

const std::vector<std::pair<std::string, std::string>>& defaults() {
  static const std::vector<std::pair<std::string, std::string>> table = {
      {"scenario", "benchmark"},
      {"family", "bm"},  // bm | fbm | corpus
      {"hurst", "0.5"},
      {"dim", "2"},
      {"corpus_path", ""},
      {"horizon", "1"},
      {"grid", "256"},
      {"volatility", "constant"},  // constant | sup_normalized
      {"vol_scale", "1"},
      {"seed", "1"},
      {"index", "0"},
      {"y0_mean", "0"},
      {"y0_std", "1"},
      {"vf", "benchmark"},  // benchmark | identity | linear
      {"vf_b", "0.5"},
      {"kernel", "linear"},  // linear | zero | smooth_attraction
      {"kernel_a", "0.5"},
      {"kernel_r", "1"},
      {"p", "2.5"},
      {"tol", "1e-6"},
      {"max_iter", "50"},
      {"ensemble", "2000"},
      {"support_n", "8"},
      {"m_ref", "4096"},
      {"ns", "8,16,32,64,128,256,512"},
      {"repeats", "20"},
      {"pathwise_max_n", "128"},
      {"eps", "0,0.2,0.1,0.05,0.025"},
      {"nu_ensemble", "200"},
      {"check_probes", "100"},
      {"check_seeds", "10"},
      {"check_particles", "2,4"},
      {"bound_samples", "100"},
      {"alphas", "0.5,1,2"},
      {"mgf_alpha", "1"},
      {"mgf_samples", "1000"},
      {"thetas", "0,0.1,0.5,1"},
  };
  return table;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    cell = trim(cell);
    if (!cell.empty()) out.push_back(cell);
  }
  return out;
}

double parse_real(const std::string& key, const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size() || !std::isfinite(v))
    throw InvalidInput("config key '" + key + "': '" + s + "' is not a number");
  return v;
}

long long parse_int(const std::string& key, const std::string& s) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw InvalidInput("config key '" + key + "': '" + s + "' is not an integer");
  return v;
}

void require_choice(const ExperimentConfig& cfg, const std::string& key,
                    std::initializer_list<const char*> choices) {
  const std::string& v = cfg.get(key);
  for (const char* c : choices)
    if (v == c) return;
  std::string msg = "config key '" + key + "' must be one of";
  for (const char* c : choices) msg += std::string(" ") + c;
  throw InvalidInput(msg + " (got '" + v + "')");
}

}  // namespace

ExperimentConfig::ExperimentConfig() {
  for (const auto& [k, v] : defaults()) values_[k] = v;
}

const std::vector<std::string>& ExperimentConfig::keys() {
  static const std::vector<std::string> k = [] {
    std::vector<std::string> out;
    for (const auto& kv : defaults()) out.push_back(kv.first);
    return out;
  }();
  return k;
}

ExperimentConfig ExperimentConfig::from_text(const std::string& text) {
  ExperimentConfig cfg;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InvalidInput("config line " + std::to_string(lineno) +
                         ": expected 'key = value'");
    cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw InvalidInput("cannot read config file '" + file + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return from_text(ss.str());
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw InvalidInput("unknown config key '" + key + "'");
  it->second = value;
}

void ExperimentConfig::set_assignment(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos)
    throw InvalidInput("override '" + assignment + "' is not key=value");
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

const std::string& ExperimentConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw InvalidInput("unknown config key '" + key + "'");
  return it->second;
}

double ExperimentConfig::real(const std::string& key) const {
  return parse_real(key, get(key));
}

long long ExperimentConfig::integer(const std::string& key) const {
  return parse_int(key, get(key));
}

std::uint64_t ExperimentConfig::u64(const std::string& key) const {
  const std::string& s = get(key);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw InvalidInput("config key '" + key + "': '" + s +
                       "' is not an unsigned 64-bit integer");
  return v;
}

std::vector<double> ExperimentConfig::reals(const std::string& key) const {
  std::vector<double> out;
  for (const std::string& c : split_list(get(key))) out.push_back(parse_real(key, c));
  return out;
}

std::vector<std::size_t> ExperimentConfig::sizes(const std::string& key) const {
  std::vector<std::size_t> out;
  for (const std::string& c : split_list(get(key))) {
    const long long v = parse_int(key, c);
    if (v <= 0) throw InvalidInput("config key '" + key + "': entries must be positive");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

std::string ExperimentConfig::dump() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

void ExperimentConfig::validate() const {
  require_choice(*this, "family", {"bm", "fbm", "corpus"});
  require_choice(*this, "volatility", {"constant", "sup_normalized"});
  require_choice(*this, "vf", {"benchmark", "identity", "linear"});
  require_choice(*this, "kernel", {"linear", "zero", "smooth_attraction"});
  for (const char* k : {"hurst", "horizon", "vol_scale", "y0_std", "vf_b",
                        "kernel_a", "kernel_r", "p", "tol", "mgf_alpha"})
    real(k);
  for (const char* k : {"dim", "grid", "max_iter", "ensemble", "support_n", "m_ref",
                        "repeats", "pathwise_max_n", "nu_ensemble", "check_probes",
                        "check_seeds", "bound_samples", "mgf_samples"}) {
    if (integer(k) < 0) throw InvalidInput("config key '" + std::string(k) + "' must be >= 0");
  }
  u64("seed");
  u64("index");
  reals("y0_mean");
  sizes("ns");
  sizes("check_particles");
  for (double a : reals("alphas"))
    if (!(a > 0.0)) throw InvalidInput("alphas must be positive");
  for (double e : reals("eps"))
    if (!(e >= 0.0)) throw InvalidInput("eps entries must be >= 0");
  reals("thetas");
  if (!(real("tol") > 0.0)) throw InvalidInput("tol must be positive");
  if (!(real("hurst") > 1.0 / 3.0 && real("hurst") <= 1.0))
    throw InvalidInput("hurst must lie in (1/3, 1]");
  if (!(real("y0_std") >= 0.0)) throw InvalidInput("y0_std must be >= 0");
  if (!(real("kernel_r") > 0.0)) throw InvalidInput("kernel_r must be positive");
  if (integer("dim") < 1) throw InvalidInput("dim must be >= 1");
  if (integer("max_iter") < 1) throw InvalidInput("max_iter must be >= 1");
  if (integer("repeats") < 1) throw InvalidInput("repeats must be >= 1");
  if (integer("ensemble") < 1 || integer("m_ref") < 1)
    throw InvalidInput("ensemble sizes must be >= 1");
  if (family_is_corpus() && get("corpus_path").empty())
    throw InvalidInput("family = corpus needs corpus_path");
  const std::size_t ys = reals("y0_mean").size();
  if (ys != 1 && ys != static_cast<std::size_t>(integer("dim")))
    throw InvalidInput("y0_mean must have 1 or dim entries");
  if (get("vf") == "benchmark" && integer("dim") < 2)
    throw InvalidInput("benchmark fields need dim >= 2");
  // Builds the PreferenceSpec (loads the corpus) and checks the grid and field setup.
  build_spec(*this).validate();
  register_fields(build_fields(*this));
}

bool ExperimentConfig::family_is_corpus() const { return get("family") == "corpus"; }

const char* version_string() { return "roughmf 1.0.0"; }

PreferenceSpec build_spec(const ExperimentConfig& cfg) {
  PreferenceSpec spec;
  const std::string& fam = cfg.get("family");
  spec.family = fam == "fbm"      ? DriverFamily::kFractional
                : fam == "corpus" ? DriverFamily::kCorpus
                                  : DriverFamily::kBrownian;
  spec.hurst = cfg.real("hurst");
  spec.dim = static_cast<int>(cfg.integer("dim"));
  spec.horizon = cfg.real("horizon");
  const long long grid = cfg.integer("grid");
  if (grid < 1) throw InvalidInput("grid must be >= 1");
  spec.grid_size = static_cast<std::size_t>(grid);
  spec.volatility.kind = cfg.get("volatility") == "sup_normalized"
                             ? VolatilityRule::Kind::kSupNormalized
                             : VolatilityRule::Kind::kConstant;
  spec.volatility.scale = cfg.real("vol_scale");
  spec.seed = cfg.u64("seed");
  spec.p = cfg.real("p");
  if (spec.family == DriverFamily::kCorpus)
    spec.corpus = std::make_shared<const PathCorpus>(read_corpus_csv(cfg.get("corpus_path")));
  spec.validate();
  return spec;
}

InitialLaw build_initial_law(const ExperimentConfig& cfg) {
  const int e = static_cast<int>(cfg.integer("dim"));
  const std::vector<double> m = cfg.reals("y0_mean");
  InitialLaw u0;
  u0.mean.resize(e);
  for (int i = 0; i < e; ++i) u0.mean(i) = m.size() == 1 ? m[0] : m[i];
  u0.std = cfg.real("y0_std");
  return u0;
}

VectorFieldSet build_fields(const ExperimentConfig& cfg) {
  const int d = static_cast<int>(cfg.integer("dim"));
  const std::string& vf = cfg.get("vf");
  const double b = cfg.real("vf_b");
  if (vf == "benchmark") return saturated_axis_fields(d, b);
  if (vf == "identity") return constant_fields(Mat::Identity(d, d));
  std::vector<Mat> mats;
  for (int i = 0; i < d; ++i) {
    Mat a = Mat::Zero(d, d);
    a(i, i) = b;
    mats.push_back(a);
  }
  return linear_fields(std::move(mats));
}

DriftKernel build_kernel(const ExperimentConfig& cfg) {
  const std::string& k = cfg.get("kernel");
  if (k == "zero") return zero_kernel();
  if (k == "smooth_attraction")
    return smooth_attraction_kernel(cfg.real("kernel_a"), cfg.real("kernel_r"));
  return linear_attraction_kernel(cfg.real("kernel_a"));
}

Scenario build_scenario(const ExperimentConfig& cfg) {
  Scenario sc;
  sc.spec = build_spec(cfg);
  sc.u0 = build_initial_law(cfg);
  sc.vf = register_fields(build_fields(cfg));
  sc.kernel = build_kernel(cfg);
  sc.p = cfg.real("p");
  return sc;
}

FixedPointOptions build_fixed_point_options(const ExperimentConfig& cfg) {
  FixedPointOptions o;
  o.tol = cfg.real("tol");
  o.max_iter = static_cast<int>(cfg.integer("max_iter"));
  o.p = cfg.real("p");
  return o;
}

}  // namespace roughmf
