#include "fima/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

namespace fima {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size() || !std::isfinite(d)) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected a real number, got '" + v + "'");
  }
}

long long to_integer(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size())
    throw ConfigError("config key '" + key + "': expected an integer, got '" + v + "'");
  return out;
}

std::size_t to_size(const std::string& key, const std::string& v) {
  const long long i = to_integer(key, v);
  if (i < 0) throw ConfigError("config key '" + key + "': must be >= 0");
  return static_cast<std::size_t>(i);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError("config key '" + key + "': expected a boolean, got '" + v + "'");
}

std::vector<std::string> to_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
#define FIMA_STR(name) t[#name] = [](ExperimentConfig& c, const std::string&, const std::string& v) { c.name = v; }
#define FIMA_REAL(name) t[#name] = [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.name = to_double(k, v); }
#define FIMA_INT(name) t[#name] = [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.name = static_cast<int>(to_integer(k, v)); }
#define FIMA_SIZE(name) t[#name] = [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.name = to_size(k, v); }
#define FIMA_BOOL(name) t[#name] = [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.name = to_bool(k, v); }
#define FIMA_LIST(name) t[#name] = [](ExperimentConfig& c, const std::string&, const std::string& v) { c.name = to_list(v); }
    FIMA_STR(scheme);
    FIMA_STR(module);
    FIMA_STR(penalty);
    FIMA_REAL(lambda);
    FIMA_REAL(tau);
    FIMA_REAL(tv_weight);
    FIMA_INT(tv_iters);
    FIMA_REAL(rf_sigma);
    FIMA_STR(external_command);
    FIMA_INT(external_timeout_ms);
    FIMA_REAL(gamma_factor);
    FIMA_REAL(mu_factor);
    FIMA_REAL(c_ratio);
    FIMA_REAL(tol);
    FIMA_INT(max_iters);
    FIMA_INT(wavelet_levels);
    FIMA_BOOL(check_gradient);
    FIMA_REAL(lambda_x);
    FIMA_REAL(lambda_b);
    FIMA_REAL(tau_x);
    FIMA_REAL(tau_b);
    FIMA_INT(scales);
    FIMA_SIZE(kernel_size);
    FIMA_STR(x_module);
    FIMA_REAL(blind_tv_weight);
    FIMA_SIZE(seed);
    FIMA_SIZE(size);
    FIMA_STR(kernel_kind);
    FIMA_SIZE(synth_kernel_size);
    FIMA_REAL(noise_level);
    FIMA_LIST(bench_schemes);
    FIMA_LIST(bench_modules);
    FIMA_INT(bench_instances);
    FIMA_INT(bench_jobs);
    FIMA_STR(input);
    FIMA_STR(kernel);
    FIMA_STR(truth);
    FIMA_STR(true_kernel);
    FIMA_STR(output_dir);
    FIMA_REAL(peak);
    FIMA_BOOL(timing);
#undef FIMA_STR
#undef FIMA_REAL
#undef FIMA_INT
#undef FIMA_SIZE
#undef FIMA_BOOL
#undef FIMA_LIST
    return t;
  }();
  return table;
}

template <class F>
void rethrow_as_config(F&& f) {
  try {
    f();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace

void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  const auto it = setters().find(key);
  if (it == setters().end()) throw ConfigError("unknown config key '" + key + "'");
  it->second(cfg, key, value);
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, _] : setters()) keys.push_back(k);
  return keys;
}

std::vector<std::pair<std::string, std::string>> parse_key_values(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    out.emplace_back(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return out;
}

ExperimentConfig load_config(const std::filesystem::path& file,
                             const std::vector<std::string>& overrides) {
  ExperimentConfig cfg;
  if (!file.empty()) {
    std::ifstream in(file);
    if (!in) throw InputError(file.string() + ": cannot open config file");
    std::stringstream buf;
    buf << in.rdbuf();
    for (const auto& [k, v] : parse_key_values(buf.str())) set_config_value(cfg, k, v);
  }
  for (const std::string& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ConfigError("override '" + o + "': expected key=value");
    set_config_value(cfg, trim(o.substr(0, eq)), trim(o.substr(eq + 1)));
  }
  return cfg;
}

void validate(const ExperimentConfig& c) {
  if (!(c.gamma_factor > 0.0 && c.gamma_factor < 1.0))
    throw ConfigError("gamma_factor must lie in (0, 1) so that gamma < 1/L");
  if (!(c.mu_factor > 0.0)) throw ConfigError("mu_factor must be positive");
  if (!(c.c_ratio > 0.0 && c.c_ratio < 0.5))
    throw ConfigError("c_ratio must lie in (0, 0.5) so that 0 < 2C < mu");
  if (c.max_iters < 1) throw ConfigError("max_iters must be positive");
  if (!(c.tol >= 0.0)) throw ConfigError("tol must be >= 0");
  if (!(c.lambda >= 0.0) || !(c.lambda_x >= 0.0)) throw ConfigError("lambda must be >= 0");
  if (!(c.lambda_b > 0.0)) throw ConfigError("lambda_b must be positive");
  if (!(c.tau > 0.0) || !(c.tau_x > 0.0) || !(c.tau_b > 0.0))
    throw ConfigError("tau, tau_x and tau_b must be positive");
  if (c.tv_iters < 1) throw ConfigError("tv_iters must be positive");
  if (!(c.tv_weight > 0.0) || !(c.blind_tv_weight > 0.0)) throw ConfigError("tv weights must be positive");
  if (!(c.rf_sigma > 0.0)) throw ConfigError("rf_sigma must be positive");
  if (c.external_timeout_ms < 1) throw ConfigError("external_timeout_ms must be positive");
  if (c.scales < 1) throw ConfigError("scales must be >= 1");
  if (c.kernel_size % 2 == 0) throw ConfigError("kernel_size must be odd");
  if (c.bench_instances < 0) throw ConfigError("bench_instances must be >= 0");
  if (c.bench_jobs < 1) throw ConfigError("bench_jobs must be >= 1");
  if (!(c.peak > 0.0)) throw ConfigError("peak must be positive");
  if (c.scheme != "mfima") rethrow_as_config([&] { parse_nonblind_scheme(c.scheme); });
  rethrow_as_config([&] {
    parse_module_kind(c.module);
    parse_module_kind(c.x_module);
    parse_kernel_kind(c.kernel_kind);
    for (const auto& s : c.bench_schemes) parse_nonblind_scheme(s);
    for (const auto& m : c.bench_modules) parse_module_kind(m);
  });
  try {
    const PenaltyKind k = parse_penalty_kind(c.penalty);
    if (k != PenaltyKind::L0 && k != PenaltyKind::L1 && k != PenaltyKind::LpHalf)
      throw ConfigError("penalty must be l0, l1 or lp_half");
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  if (parse_module_kind(c.module) == ModuleKind::External && c.external_command.empty())
    throw ConfigError("module=external requires external_command");
}

NonblindOptions nonblind_options(const ExperimentConfig& c) {
  validate(c);
  NonblindOptions o;
  o.penalty = ScalarPenalty(parse_penalty_kind(c.penalty), c.lambda);
  o.scheme = parse_nonblind_scheme(c.scheme == "mfima" ? "ifima" : c.scheme);
  o.module.kind = parse_module_kind(c.module);
  o.module.tau = c.tau;
  o.module.tv_weight = c.tv_weight;
  o.module.tv_iters = c.tv_iters;
  o.module.rf_sigma = c.rf_sigma;
  o.module.external_command = c.external_command;
  o.module.external_timeout = std::chrono::milliseconds(c.external_timeout_ms);
  o.wavelet_levels = c.wavelet_levels;
  o.max_iters = c.max_iters;
  o.tol = c.tol;
  o.gamma_factor = c.gamma_factor;
  o.mu_factor = c.mu_factor;
  o.c_ratio = c.c_ratio;
  o.check_gradient = c.check_gradient;
  return o;
}

BlindOptions blind_options(const ExperimentConfig& c) {
  validate(c);
  BlindOptions o;
  o.lambda_x = c.lambda_x;
  o.lambda_b = c.lambda_b;
  o.tau_x = c.tau_x;
  o.tau_b = c.tau_b;
  o.scales = c.scales;
  o.iters_per_scale = c.max_iters;
  o.tol = c.tol;
  o.x_module = parse_module_kind(c.x_module);
  if (o.x_module == ModuleKind::PGStep || o.x_module == ModuleKind::External)
    throw ConfigError("x_module must be identity, tv or rf");
  o.use_modules = c.module != "identity";
  o.tv_weight = c.blind_tv_weight;
  o.tv_iters = c.tv_iters;
  o.rf_sigma = c.rf_sigma;
  o.x_schedule = o.b_schedule = BlockSchedule{c.gamma_factor, c.mu_factor, c.c_ratio};
  return o;
}

SyntheticSpec synthetic_spec(const ExperimentConfig& c) {
  SyntheticSpec s;
  s.seed = c.seed;
  s.size = c.size;
  try {
    s.kernel = parse_kernel_kind(c.kernel_kind);
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  s.kernel_size = c.synth_kernel_size;
  s.noise_level = c.noise_level;
  return s;
}

}  // namespace fima
