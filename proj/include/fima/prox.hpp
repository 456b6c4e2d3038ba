#pragma once

// Proximal operators, the simplex projection, and the quadratic model of the
// smooth term. Every prox is the exact global minimiser of
//     theta * h(x) + 0.5 * ||x - v||^2
// for its penalty h.

#include <string>
#include <string_view>

#include "fima/common.hpp"
#include "fima/smooth.hpp"

namespace fima {

enum class PenaltyKind { L1, L0, LpHalf, SimplexIndicator, Zero };

std::string_view to_string(PenaltyKind kind);
/// Accepts "l1", "l0", "lp", "lp0.5", "simplex", "zero". Fractional exponents
/// other than 1/2 are rejected as unsupported.
PenaltyKind parse_penalty_kind(std::string_view text);

/// lambda * h(x) for the separable penalties, or the simplex indicator.
struct ScalarPenalty {
  PenaltyKind kind = PenaltyKind::Zero;
  double weight = 0.0;

  ScalarPenalty() = default;
  ScalarPenalty(PenaltyKind k, double w);

  /// g(x); +inf for points outside the simplex when kind is SimplexIndicator.
  double value(ConstView x) const;
  /// prox_{gamma g}(v).
  Vec prox(ConstView v, double gamma) const;
};

/// Probability simplex of a fixed dimension.
struct SimplexSet {
  std::size_t dimension = 1;
  /// Membership tolerance on the unit-sum constraint.
  static constexpr double kSumTolerance = 1e-9;
  bool contains(ConstView b) const;
};

Vec prox_l1(ConstView v, double theta);
Vec prox_l0(ConstView v, double theta);
Vec prox_lp_half(ConstView v, double theta);

/// Euclidean projection onto {b >= 0, sum b = 1}: sort-and-shift, clamp,
/// renormalise. Points already on the simplex (sum defect <= 1e-12) are
/// returned unchanged, which makes the projection exactly idempotent.
Vec project_simplex(ConstView v);

/// Q(x; v) = f(v) + <grad f(v), x - v> + ||x - v||^2 / (2 gamma).
double quadratic_model(const SmoothTerm& f, ConstView v, ConstView x, double gamma);

}  // namespace fima
