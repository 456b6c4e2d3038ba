#pragma once

#include <functional>
#include <memory>
#include <optional>

#include "fima/common.hpp"

namespace fima {

/// Linear map D given by its action and the action of its adjoint.
struct LinearMap {
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  std::function<Vec(ConstView)> apply;
  std::function<Vec(ConstView)> apply_adjoint;
};

/// The differentiable part f of a composite objective.
struct SmoothTerm {
  std::function<double(ConstView)> value;
  std::function<Vec(ConstView)> gradient;
  /// Gradient Lipschitz modulus, when known.
  std::optional<double> lipschitz;
  /// Set when f(x) = ||y - D x||^2; lets the Lipschitz estimate use D directly.
  std::shared_ptr<const LinearMap> fidelity_operator;
};

/// f(x) = ||y - D x||^2 with gradient 2 D^T (D x - y).
SmoothTerm least_squares(std::shared_ptr<const LinearMap> op, Vec y);

/// f(x) = 0.5 * ||x - center||^2 (unit Lipschitz constant).
SmoothTerm half_squared_distance(Vec center);

}  // namespace fima
