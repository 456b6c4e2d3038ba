#pragma once

// Per-iteration convergence records, the stopping rule, and trace files.
//
// CSV layout (header is fixed):
//   k,objective,iter_error,recon_error,policy,block,wall_ms
// `block` is empty for single-block runs, `policy` is accept|fallback and
// floats carry 17 significant digits. The JSON mirror is an object with a
// "records" array using the same field names (block -> null when absent).

#include <cmath>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fima {

enum class Policy { Accept, Fallback };

std::string_view to_string(Policy p);

enum class StopReason { None, Tolerance, Budget };

std::string_view to_string(StopReason r);

/// Extra per-iteration quantities used by the invariant checks. Kept in
/// memory only; not part of the trace file schema.
struct IterateDiagnostics {
  static constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();
  double objective_prev = kUnset;     // Psi(x^k)
  double objective_monitor = kUnset;  // Psi(v^k)
  double refine_step_sq = kUnset;     // ||x^{k+1} - v^k||^2
  double gamma = kUnset;
  double lipschitz = kUnset;
  double mu = kUnset;
  double C = kUnset;
  double norm_d = kUnset;
  double rhs = kUnset;
  double objective_corrected = kUnset;  // Psi(u_tilde^k)
  double corrected_dist_sq = kUnset;    // ||u_tilde^k - x^k||^2
  int scale = 0;
  std::string note;
};

struct IterateRecord {
  int k = 0;
  double objective = 0.0;
  double iter_error = 0.0;
  double recon_error = 0.0;
  Policy policy = Policy::Accept;
  std::optional<int> block;
  double wall_ms = 0.0;
  IterateDiagnostics diag;
};

struct IterateTrace {
  std::vector<IterateRecord> records;
  StopReason stop = StopReason::None;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
  const IterateRecord& back() const { return records.back(); }
  void push(IterateRecord r) { records.push_back(std::move(r)); }
};

/// ||x^{k+1} - x^k|| / ||x^k||, or the absolute change when ||x^k|| = 0.
double iteration_error(double change_norm, double prev_norm);

/// Tolerance fires when the latest iteration error is <= tol; budget fires
/// when the latest k has reached max_iters. Tolerance wins when both hold.
/// Throws InvalidArgument on an empty trace.
StopReason stopping(const IterateTrace& trace, int max_iters, double tol);

void write_trace_csv(const IterateTrace& trace, std::ostream& out);
IterateTrace parse_trace_csv(std::istream& in);

void write_trace_json(const IterateTrace& trace, std::ostream& out);
IterateTrace parse_trace_json(std::istream& in);

/// Field-exact equality over the serialised columns.
bool same_serialized_fields(const IterateTrace& a, const IterateTrace& b);

inline constexpr std::string_view kTraceCsvHeader =
    "k,objective,iter_error,recon_error,policy,block,wall_ms";

}  // namespace fima
