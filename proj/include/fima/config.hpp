#pragma once

// Experiment configuration: a flat "key = value" text file ('#' starts a
// comment) plus command-line overrides. Precedence: command line > file >
// built-in defaults. Unknown keys are rejected.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "fima/deconv.hpp"
#include "fima/synthetic.hpp"

namespace fima {

/// Malformed or inconsistent configuration (exit code 2, E_CONFIG).
class ConfigError : public InputError {
 public:
  using InputError::InputError;
};

struct ExperimentConfig {
  // solver
  std::string scheme = "ifima";  // pg | apg | mapg | efima | ifima | mfima
  std::string module = "tv";     // identity | pg | tv | rf | external
  std::string penalty = "l0";    // l0 | l1 | lp_half
  double lambda = 1e-3;
  double tau = 1.0;
  double tv_weight = 1e-3;
  int tv_iters = 20;
  double rf_sigma = 1.5;
  std::string external_command;
  int external_timeout_ms = 30000;
  double gamma_factor = 0.99;
  double mu_factor = 0.9;
  double c_ratio = 0.45;
  double tol = 1e-4;
  int max_iters = 80;
  int wavelet_levels = -1;
  bool check_gradient = false;

  // blind
  double lambda_x = 4e-3;
  double lambda_b = 2.0;
  double tau_x = 1.0;
  double tau_b = 1.0;
  int scales = 3;
  std::size_t kernel_size = 11;
  std::string x_module = "tv";
  double blind_tv_weight = 0.01;

  // synthetic data
  std::uint64_t seed = 0;
  std::size_t size = 64;
  std::string kernel_kind = "gaussian";  // gaussian | motion | delta
  std::size_t synth_kernel_size = 9;
  double noise_level = 0.01;

  // bench
  std::vector<std::string> bench_schemes{"pg", "ifima"};
  std::vector<std::string> bench_modules{"identity", "tv"};
  int bench_instances = 3;
  int bench_jobs = 1;

  // io
  std::string input;
  std::string kernel;
  std::string truth;
  std::string true_kernel;
  std::string output_dir = ".";
  double peak = 1.0;
  /// Record per-iteration wall-clock time in traces (breaks byte identity).
  bool timing = false;
};

/// Sets one key from its textual value; throws ConfigError.
void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value);

/// Parses "key=value" lines; throws ConfigError with the line number.
std::vector<std::pair<std::string, std::string>> parse_key_values(const std::string& text);

/// Defaults, then `file` (when non-empty), then each "key=value" override.
ExperimentConfig load_config(const std::filesystem::path& file,
                             const std::vector<std::string>& overrides);

/// Checks step-size and error-control constraints and enum spellings before
/// anything runs. Throws ConfigError.
void validate(const ExperimentConfig& cfg);

NonblindOptions nonblind_options(const ExperimentConfig& cfg);
BlindOptions blind_options(const ExperimentConfig& cfg);
SyntheticSpec synthetic_spec(const ExperimentConfig& cfg);

std::vector<std::string> config_keys();

}  // namespace fima
