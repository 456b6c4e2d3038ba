#pragma once

// Composite objective Psi = f + g and the per-iteration primitives every
// solver is built from.

#include <functional>
#include <memory>

#include "fima/common.hpp"
#include "fima/prox.hpp"
#include "fima/smooth.hpp"

namespace fima {

/// The proximable part g.
struct NonsmoothTerm {
  /// May return kInfiniteObjective (indicator functions).
  std::function<double(ConstView)> value;
  /// prox(v, gamma) = prox_{gamma g}(v).
  std::function<Vec(ConstView, double)> prox;

  static NonsmoothTerm from_penalty(ScalarPenalty penalty);
  static NonsmoothTerm zero();
};

struct CompositeProblem {
  SmoothTerm smooth;
  NonsmoothTerm nonsmooth;
};

/// Psi(x) = f(x) + g(x); kInfiniteObjective when g(x) is infinite.
double objective(const CompositeProblem& problem, ConstView x);

/// Lipschitz modulus of grad f. Quadratic fidelities use power iteration on
/// D^T D (Rayleigh quotient, stops on a 1e-9 relative change, at most 10000
/// steps) and return 2 sigma_max(D)^2; otherwise the largest gradient-difference ratio over 100
/// fixed-seed probe pairs around `domain_probe`, inflated by 1.5.
double estimate_lipschitz(const SmoothTerm& smooth, ConstView domain_probe);

/// Sub-gradient estimate of the proximal auxiliary Psi^k at u_tilde together
/// with the error-control test ||d|| <= C ||u_tilde - x_prev||.
struct ErrorCertificate {
  Vec d;
  double norm_d = 0.0;
  double rhs = 0.0;
  bool accepted = false;
};

/// d = (mu - 1/gamma)(u_tilde - u) - (grad f(u) - grad f(u_tilde)).
///
/// Only meaningful when u_tilde = prox_{gamma g}(u - gamma (grad f(u) +
/// mu (u - x_prev))), i.e. u_tilde came out of the corrected proximal step.
ErrorCertificate subdiff_error(const SmoothTerm& smooth, ConstView u, ConstView u_tilde,
                               ConstView x_prev, double mu, double gamma, double C);

/// As above with the two gradients already evaluated.
ErrorCertificate subdiff_error_from_gradients(ConstView grad_u, ConstView grad_u_tilde,
                                              ConstView u, ConstView u_tilde, ConstView x_prev,
                                              double mu, double gamma, double C);

/// prox_{gamma g}(v - gamma grad f(v)).
Vec prox_gradient_step(const CompositeProblem& problem, ConstView v, double gamma);

/// Compares grad f against central finite differences along a few fixed-seed
/// random directions at `probe`; throws InvalidArgument on a mismatch larger
/// than `rel_tol`.
void check_gradient(const SmoothTerm& smooth, ConstView probe, double rel_tol = 1e-5,
                    int directions = 3);

}  // namespace fima
