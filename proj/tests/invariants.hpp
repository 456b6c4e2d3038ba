#pragma once

// Per-iteration convergence inequalities checked against solver traces.

#include <algorithm>
#include <cmath>

#include "fima/trace.hpp"

namespace fima::testing {

struct InvariantCounts {
  int records = 0;
  int chain = 0;       // Psi(x^{k+1}) <= Psi(v^k) <= Psi(x^k), relative slack 1e-10
  int sufficient = 0;  // Psi(x^{k+1}) <= Psi(v^k) - alpha ||x^{k+1} - v^k||^2 + 1e-8
  int corrected = 0;   // accepted: Psi(u~) <= Psi(x^k) - (mu/2 - C) ||u~ - x^k||^2 + 1e-8
  int accepts = 0;

  int violations() const { return chain + sufficient + corrected; }
  InvariantCounts& operator+=(const InvariantCounts& o) {
    records += o.records;
    chain += o.chain;
    sufficient += o.sufficient;
    corrected += o.corrected;
    accepts += o.accepts;
    return *this;
  }
};

/// `error_control` enables the corrected-point inequality on accepted
/// iterations (iFIMA, mFIMA).
inline InvariantCounts check_invariants(const IterateTrace& trace, bool error_control) {
  InvariantCounts c;
  for (const IterateRecord& r : trace.records) {
    const IterateDiagnostics& d = r.diag;
    ++c.records;
    const double next = r.objective, mon = d.objective_monitor, prev = d.objective_prev;
    if (!(next <= mon + 1e-10 * std::abs(mon)) || !(mon <= prev + 1e-10 * std::abs(prev)))
      ++c.chain;
    const double alpha = 1.0 / (2.0 * d.gamma) - d.lipschitz / 2.0;
    if (!(alpha > 0.0) || !(next <= mon - alpha * d.refine_step_sq + 1e-8)) ++c.sufficient;
    if (r.policy == Policy::Accept && error_control) {
      ++c.accepts;
      if (!(d.objective_corrected <=
            prev - (d.mu / 2.0 - d.C) * d.corrected_dist_sq + 1e-8))
        ++c.corrected;
    }
  }
  return c;
}

}  // namespace fima::testing
