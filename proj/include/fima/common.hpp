#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fima {

using Vec = std::vector<double>;
using ConstView = std::span<const double>;

// Error taxonomy. The CLI maps each family onto a process exit code.

/// Bad argument or precondition violation (exit code 2 at the CLI).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Unreadable or malformed input file (exit code 2).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure inside a solver or subproblem (exit code 3).
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EstimationFailure : public SolverError {
 public:
  using SolverError::SolverError;
};

class SubproblemFailure : public SolverError {
 public:
  using SolverError::SolverError;
};

/// A module produced unusable output, e.g. non-finite values (exit code 4).
class ModuleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Soft failure raised by a module that could not run this time (external
/// process died, timed out, wrote garbage). Solvers absorb it as a fallback.
class ModuleUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kInfiniteObjective = HUGE_VAL;

inline bool is_infinite_objective(double v) { return v == kInfiniteObjective; }

inline bool all_finite(ConstView v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

inline void require_finite(ConstView v, const char* what) {
  if (!all_finite(v)) throw InvalidArgument(std::string(what) + ": non-finite input");
}

inline double dot(ConstView a, ConstView b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(ConstView a) { return std::sqrt(dot(a, a)); }

inline double dist_sq(ConstView a, ConstView b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

inline double dist(ConstView a, ConstView b) { return std::sqrt(dist_sq(a, b)); }

/// out = a + s * b
inline Vec axpy(ConstView a, double s, ConstView b) {
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + s * b[i];
  return out;
}

inline void require_same_size(ConstView a, ConstView b, const char* what) {
  if (a.size() != b.size())
    throw InvalidArgument(std::string(what) + ": dimension mismatch (" + std::to_string(a.size()) +
                          " vs " + std::to_string(b.size()) + ")");
}

}  // namespace fima
