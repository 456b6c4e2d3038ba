#pragma once

// FIMA solvers (explicit momentum, implicit momentum / error control,
// multi-block) and the classical first-order baselines they are compared
// against. Every solver returns the final iterate and an IterateTrace with
// exactly one record per iteration (one per block and sweep for mFIMA).

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fima/modules.hpp"
#include "fima/problem.hpp"
#include "fima/trace.hpp"

namespace fima {

/// Per-iteration parameter sequence; iteration k uses values[min(k, n-1)].
struct Schedule {
  std::vector<double> values;

  static Schedule constant(double v) { return Schedule{{v}}; }
  bool empty() const { return values.empty(); }
  double at(int k) const;
};

/// Gradient and prox perturbations for the inexact baseline:
/// e^k, eps^k = scale / (k+1)^decay * N(0, I), drawn from a counter RNG.
struct InexactNoise {
  double gradient_scale = 0.0;
  double prox_scale = 0.0;
  double decay = 2.0;
  std::uint64_t seed = 0;
};

struct SolverConfig {
  int max_iters = 80;
  double iter_error_tol = 1e-4;
  Schedule gamma;
  Schedule mu;
  Schedule C;
  bool nesterov = false;
  /// Lipschitz modulus used to validate gamma and reported in diagnostics.
  std::optional<double> lipschitz;
  InexactNoise inexact;
  /// Run check_gradient on the smooth term at x0 before iterating.
  bool check_gradient = false;
};

/// Throws InvalidArgument unless 0 < gamma^k < 1/L (when L is known) and,
/// with `error_control`, 0 < 2 C^k < mu^k for every scheduled value.
void validate(const SolverConfig& cfg, bool error_control);

struct SolveResult {
  Vec x;
  IterateTrace trace;
};

SolveResult solve_efima(const CompositeProblem& problem, const ModulePair& modules, ConstView x0,
                        const SolverConfig& cfg);

SolveResult solve_ifima(const CompositeProblem& problem, const ModulePair& modules, ConstView x0,
                        const SolverConfig& cfg);

enum class BaselineVariant { PG, APG, MonotoneAPG, Inexact };

std::string_view to_string(BaselineVariant v);

/// PG: forward-backward from x^k. APG: FISTA extrapolation with
/// beta^k = (t_{k-1} - 1) / t_k. MonotoneAPG: APG step kept only when it does
/// not increase Psi, otherwise a PG step from x^k. Inexact: PG (or APG when
/// cfg.nesterov) with cfg.inexact perturbations on the gradient and prox.
SolveResult solve_baseline(const CompositeProblem& problem, ConstView x0, const SolverConfig& cfg,
                           BaselineVariant variant);

// ---- multi-block ------------------------------------------------------------

using Blocks = std::vector<Vec>;

/// f(X) + sum_n g_n(x_n) with block-partial gradients and block Lipschitz
/// moduli L_n that may depend on the other blocks.
struct MultiBlockProblem {
  std::function<double(const Blocks&)> smooth_value;
  std::function<Vec(const Blocks&, std::size_t)> partial_gradient;
  std::function<double(const Blocks&, std::size_t)> partial_lipschitz;
  std::vector<NonsmoothTerm> nonsmooth;
};

double objective(const MultiBlockProblem& problem, const Blocks& x);

/// A_f maps the whole block tuple to an updated tuple; A_{g_n} receives that
/// tuple and returns the new n-th block.
struct MultiBlockModules {
  std::function<Blocks(const Blocks&)> a_f;
  std::vector<std::function<Vec(const Blocks&)>> a_g;
  std::string label;
};

/// Identity A_f and A_{g_n} returning the n-th component unchanged.
MultiBlockModules multiblock_identity(std::size_t blocks);

/// Per-block parameters relative to the current L_n:
/// gamma_n = gamma_factor / L_n, mu_n = mu_factor / gamma_n, C_n = c_ratio * mu_n.
struct BlockSchedule {
  double gamma_factor = 0.99;
  double mu_factor = 1.0;
  double c_ratio = 0.25;
};

struct MultiBlockConfig {
  int max_iters = 80;
  double iter_error_tol = 1e-4;
  std::vector<BlockSchedule> blocks;
  /// Called after every block update with (sweep k, block n, state).
  std::function<void(int, std::size_t, const Blocks&)> on_block_update;
  /// Scale tag copied into every record's diagnostics.
  int scale = 0;
};

struct MultiBlockResult {
  Blocks x;
  IterateTrace trace;
};

MultiBlockResult solve_mfima(const MultiBlockProblem& problem, const MultiBlockModules& modules,
                             const Blocks& x0, const MultiBlockConfig& cfg);

}  // namespace fima
