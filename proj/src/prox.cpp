#include "fima/prox.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "fima/kernels.hpp"

namespace fima {
namespace {

void check_prox_args(ConstView v, double theta, const char* op) {
  if (!(theta > 0.0) || !std::isfinite(theta))
    throw InvalidArgument(std::string(op) + ": theta must be positive and finite");
  require_finite(v, op);
}

}  // namespace

std::string_view to_string(PenaltyKind kind) {
  switch (kind) {
    case PenaltyKind::L1: return "l1";
    case PenaltyKind::L0: return "l0";
    case PenaltyKind::LpHalf: return "lp0.5";
    case PenaltyKind::SimplexIndicator: return "simplex";
    case PenaltyKind::Zero: return "zero";
  }
  return "?";
}

PenaltyKind parse_penalty_kind(std::string_view text) {
  if (text == "l1") return PenaltyKind::L1;
  if (text == "l0") return PenaltyKind::L0;
  if (text == "lp" || text == "lp0.5" || text == "lp_half") return PenaltyKind::LpHalf;
  if (text == "simplex") return PenaltyKind::SimplexIndicator;
  if (text == "zero" || text == "none") return PenaltyKind::Zero;
  if (text.starts_with("lp"))
    throw InvalidArgument("penalty '" + std::string(text) +
                          "': only the p = 1/2 fractional penalty is supported");
  throw InvalidArgument("unknown penalty kind '" + std::string(text) + "'");
}

ScalarPenalty::ScalarPenalty(PenaltyKind k, double w) : kind(k), weight(w) {
  if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidArgument("penalty weight must be >= 0");
  if (k == PenaltyKind::SimplexIndicator || k == PenaltyKind::Zero) weight = 0.0;
}

double ScalarPenalty::value(ConstView x) const {
  switch (kind) {
    case PenaltyKind::Zero: return 0.0;
    case PenaltyKind::SimplexIndicator:
      return SimplexSet{x.size()}.contains(x) ? 0.0 : kInfiniteObjective;
    case PenaltyKind::L1: {
      double s = 0.0;
      for (double t : x) s += std::abs(t);
      return weight * s;
    }
    case PenaltyKind::L0: {
      double s = 0.0;
      for (double t : x) s += t != 0.0 ? 1.0 : 0.0;
      return weight * s;
    }
    case PenaltyKind::LpHalf: {
      double s = 0.0;
      for (double t : x) s += std::sqrt(std::abs(t));
      return weight * s;
    }
  }
  return 0.0;
}

Vec ScalarPenalty::prox(ConstView v, double gamma) const {
  if (!(gamma > 0.0)) throw InvalidArgument("prox: gamma must be positive");
  switch (kind) {
    case PenaltyKind::Zero: return Vec(v.begin(), v.end());
    case PenaltyKind::SimplexIndicator: return project_simplex(v);
    default: break;
  }
  if (weight == 0.0) return Vec(v.begin(), v.end());
  const double theta = gamma * weight;
  switch (kind) {
    case PenaltyKind::L1: return prox_l1(v, theta);
    case PenaltyKind::L0: return prox_l0(v, theta);
    case PenaltyKind::LpHalf: return prox_lp_half(v, theta);
    default: break;
  }
  return Vec(v.begin(), v.end());
}

bool SimplexSet::contains(ConstView b) const {
  if (b.size() != dimension || b.empty()) return false;
  double s = 0.0;
  for (double t : b) {
    if (!(t >= 0.0)) return false;
    s += t;
  }
  return std::abs(s - 1.0) <= kSumTolerance;
}

Vec prox_l1(ConstView v, double theta) {
  check_prox_args(v, theta, "prox_l1");
  Vec out(v.size());
  kernels::parallel::soft_threshold(v, out, theta);
  return out;
}

Vec prox_l0(ConstView v, double theta) {
  check_prox_args(v, theta, "prox_l0");
  Vec out(v.size());
  kernels::parallel::hard_threshold(v, out, theta);
  return out;
}

Vec prox_lp_half(ConstView v, double theta) {
  check_prox_args(v, theta, "prox_lp_half");
  Vec out(v.size());
  kernels::parallel::half_threshold(v, out, theta);
  return out;
}

Vec project_simplex(ConstView v) {
  if (v.empty()) throw InvalidArgument("project_simplex: empty vector");
  require_finite(v, "project_simplex");

  bool nonneg = true;
  double total = 0.0;
  for (double t : v) {
    nonneg = nonneg && t >= 0.0;
    total += t;
  }
  if (nonneg && std::abs(total - 1.0) <= 1e-12) return Vec(v.begin(), v.end());

  Vec sorted(v.begin(), v.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumsum = 0.0, shift = 0.0;
  for (std::size_t j = 0; j < sorted.size(); ++j) {
    cumsum += sorted[j];
    const double candidate = (cumsum - 1.0) / static_cast<double>(j + 1);
    if (sorted[j] - candidate > 0.0) shift = candidate;
  }

  Vec out(v.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = std::max(v[i] - shift, 0.0);
    sum += out[i];
  }
  if (sum > 0.0) {
    for (double& t : out) t /= sum;
  } else {
    // every coordinate clamped (only reachable through rounding); fall back to
    // the largest entry
    const auto it = std::max_element(v.begin(), v.end());
    out[static_cast<std::size_t>(it - v.begin())] = 1.0;
  }
  return out;
}

double quadratic_model(const SmoothTerm& f, ConstView v, ConstView x, double gamma) {
  if (!(gamma > 0.0)) throw InvalidArgument("quadratic_model: gamma must be positive");
  require_same_size(v, x, "quadratic_model");
  const Vec g = f.gradient(v);
  double inner = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - v[i];
    inner += g[i] * d;
    sq += d * d;
  }
  return f.value(v) + inner + sq / (2.0 * gamma);
}

}  // namespace fima
