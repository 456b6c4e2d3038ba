#pragma once

// Subcommands behind the `fima` executable. Each cmd_* throws on failure;
// run_cli maps exceptions onto exit codes and prints one line
// "<CODE>: <message>" on the error stream.
//
//   0 ok, 2 input/config error (E_INPUT, E_CONFIG), 3 solver error
//   (E_SOLVER), 4 module error (E_MODULE).

#include <iosfwd>
#include <string>
#include <vector>

#include "fima/config.hpp"

namespace fima {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitSolver = 3;
inline constexpr int kExitModule = 4;

/// Writes restored.pgm, trace.csv, trace.json and metrics.json.
void cmd_solve_nonblind(const ExperimentConfig& cfg, std::ostream& log);

/// Writes kernel.txt, gradient_x.pgm, gradient_y.pgm, trace.csv, trace.json
/// and metrics.json; with both truth and true_kernel also latent.pgm and ER.
void cmd_solve_blind(const ExperimentConfig& cfg, std::ostream& log);

/// Writes bench.csv, one row per (scheme, module) cell:
///   scheme,module,instances,status,psnr,ssim,iterations,time_s,objective_digest
/// Metrics are means over the synthetic instances; objective_digest hashes
/// every instance's objective trajectory.
void cmd_bench(const ExperimentConfig& cfg, std::ostream& log);

inline constexpr std::string_view kBenchHeader =
    "scheme,module,instances,status,psnr,ssim,iterations,time_s,objective_digest";

/// Writes z_true.pgm, y.pgm and b_true.txt.
void cmd_make_synthetic(const ExperimentConfig& cfg, std::ostream& log);

/// Maps an in-flight exception to (exit code, error code).
std::pair<int, std::string> classify_exception(std::exception_ptr e, std::string& message);

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fima
