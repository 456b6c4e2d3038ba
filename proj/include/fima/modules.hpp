#pragma once

// Computational modules plugged into the FIMA solvers: the pair (A_f, A_g)
// applied as A_g(A_f(x)), plus image denoisers usable as A_g.

#include <chrono>
#include <functional>
#include <string>

#include "fima/common.hpp"
#include "fima/kernels.hpp"
#include "fima/problem.hpp"

namespace fima {

using VecMap = std::function<Vec(ConstView)>;

struct ModulePair {
  VecMap a_f;
  VecMap a_g;
  std::string label;

  Vec apply(ConstView x) const { return a_g(a_f(x)); }
};

/// Both maps are the identity; FIMA with this pair reduces to plain PG.
ModulePair module_identity();

/// A_f(x) = x - gamma grad f(x), A_g(v) = prox_{gamma g}(v).
ModulePair module_pg_step(const CompositeProblem& problem, double gamma);

/// Unary image-domain denoiser.
struct Denoiser {
  std::function<Vec(ConstView, kernels::Dims)> apply;
  std::string label;
};

/// Approximate argmin_z weight*TV(z) + 0.5||z - x||^2 with a fixed number of
/// Chambolle dual iterations.
Denoiser module_tv_denoise(double weight, int inner_iters = 20);

/// Separable periodic exponential smoothing with decay exp(-sqrt(2)/sigma).
Denoiser module_recursive_filter(double sigma);

/// Runs an external program on the iterate. The template's {in} and {out}
/// placeholders are replaced by temporary 16-bit PGM paths. Values are
/// clamped to [0, 1] and quantised on the way out. Process failure, timeout
/// or an unreadable result raise ModuleUnavailable.
Denoiser module_external_denoiser(std::string command_template,
                                  std::chrono::milliseconds timeout = std::chrono::seconds(30));

/// Lift an image denoiser to a map on vectors of a fixed image shape.
VecMap as_map(Denoiser denoiser, kernels::Dims dims);

/// Total variation (isotropic, forward differences, Neumann boundary).
double total_variation(ConstView image, kernels::Dims dims);

}  // namespace fima
