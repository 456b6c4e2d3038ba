#include "fima/problem.hpp"

#include <algorithm>
#include <cmath>

#include "fima/random.hpp"

namespace fima {

SmoothTerm least_squares(std::shared_ptr<const LinearMap> op, Vec y) {
  if (!op) throw InvalidArgument("least_squares: null operator");
  if (y.size() != op->out_dim) throw InvalidArgument("least_squares: data size mismatch");
  SmoothTerm f;
  auto data = std::make_shared<const Vec>(std::move(y));
  f.value = [op, data](ConstView x) {
    const Vec dx = op->apply(x);
    return dist_sq(dx, *data);
  };
  f.gradient = [op, data](ConstView x) {
    Vec r = op->apply(x);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = 2.0 * (r[i] - (*data)[i]);
    return op->apply_adjoint(r);
  };
  f.fidelity_operator = std::move(op);
  return f;
}

SmoothTerm half_squared_distance(Vec center) {
  auto c = std::make_shared<const Vec>(std::move(center));
  SmoothTerm f;
  f.value = [c](ConstView x) { return 0.5 * dist_sq(x, *c); };
  f.gradient = [c](ConstView x) {
    Vec g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) g[i] = x[i] - (*c)[i];
    return g;
  };
  f.lipschitz = 1.0;
  return f;
}

NonsmoothTerm NonsmoothTerm::from_penalty(ScalarPenalty penalty) {
  NonsmoothTerm g;
  g.value = [penalty](ConstView x) { return penalty.value(x); };
  g.prox = [penalty](ConstView v, double gamma) { return penalty.prox(v, gamma); };
  return g;
}

NonsmoothTerm NonsmoothTerm::zero() { return from_penalty(ScalarPenalty{}); }

double objective(const CompositeProblem& problem, ConstView x) {
  const double g = problem.nonsmooth.value(x);
  if (is_infinite_objective(g)) return kInfiniteObjective;
  return problem.smooth.value(x) + g;
}

double estimate_lipschitz(const SmoothTerm& smooth, ConstView domain_probe) {
  if (smooth.fidelity_operator) {
    const LinearMap& d = *smooth.fidelity_operator;
    Vec v(domain_probe.begin(), domain_probe.end());
    double nv = norm2(v);
    if (nv == 0.0) {
      v.assign(d.in_dim, 1.0);
      nv = norm2(v);
    }
    for (double& t : v) t /= nv;
    double lambda = 0.0;
    for (int it = 0; it < 10000; ++it) {
      Vec w = d.apply_adjoint(d.apply(v));
      // Rayleigh quotient of the symmetric D^T D; error decays as rho^(2k)
      const double next = dot(v, w);
      const double nw = norm2(w);
      if (!std::isfinite(nw)) break;
      if (nw == 0.0) return 0.0;
      for (double& t : w) t /= nw;
      v = std::move(w);
      // a 1e-6 step-to-step change can leave a larger error when the top two
      // eigenvalues are close, so the stopping test is stricter than the target
      if (it > 0 && std::abs(next - lambda) <= 1e-9 * next) return 2.0 * next;
      lambda = next;
    }
    throw EstimationFailure("estimate_lipschitz: power iteration did not converge");
  }

  if (!smooth.gradient) throw InvalidArgument("estimate_lipschitz: gradient unavailable");
  CounterRng rng(0x5eed1ab5ULL);
  const std::size_t n = domain_probe.size();
  double best = 0.0;
  for (int pair = 0; pair < 100; ++pair) {
    Vec a(domain_probe.begin(), domain_probe.end()), b = a;
    for (std::size_t i = 0; i < n; ++i) {
      a[i] += rng.next_normal();
      b[i] += rng.next_normal();
    }
    const double dx = dist(a, b);
    if (dx == 0.0) continue;
    best = std::max(best, dist(smooth.gradient(a), smooth.gradient(b)) / dx);
  }
  if (!std::isfinite(best)) throw EstimationFailure("estimate_lipschitz: non-finite estimate");
  return 1.5 * best;
}

ErrorCertificate subdiff_error_from_gradients(ConstView grad_u, ConstView grad_u_tilde,
                                              ConstView u, ConstView u_tilde, ConstView x_prev,
                                              double mu, double gamma, double C) {
  if (!(mu > 0.0) || !(gamma > 0.0) || !(C >= 0.0))
    throw InvalidArgument("subdiff_error: mu, gamma must be positive and C nonnegative");
  require_same_size(u, u_tilde, "subdiff_error");
  require_same_size(u, x_prev, "subdiff_error");
  ErrorCertificate cert;
  cert.d.resize(u.size());
  const double scale = mu - 1.0 / gamma;
  for (std::size_t i = 0; i < u.size(); ++i)
    cert.d[i] = scale * (u_tilde[i] - u[i]) - (grad_u[i] - grad_u_tilde[i]);
  cert.norm_d = norm2(cert.d);
  cert.rhs = C * dist(u_tilde, x_prev);
  cert.accepted = cert.norm_d <= cert.rhs;
  return cert;
}

ErrorCertificate subdiff_error(const SmoothTerm& smooth, ConstView u, ConstView u_tilde,
                               ConstView x_prev, double mu, double gamma, double C) {
  return subdiff_error_from_gradients(smooth.gradient(u), smooth.gradient(u_tilde), u, u_tilde,
                                      x_prev, mu, gamma, C);
}

Vec prox_gradient_step(const CompositeProblem& problem, ConstView v, double gamma) {
  if (!(gamma > 0.0)) throw InvalidArgument("prox_gradient_step: gamma must be positive");
  const Vec g = problem.smooth.gradient(v);
  return problem.nonsmooth.prox(axpy(v, -gamma, g), gamma);
}

void check_gradient(const SmoothTerm& smooth, ConstView probe, double rel_tol, int directions) {
  CounterRng rng(0x9a7d1e47ULL);
  const Vec x(probe.begin(), probe.end());
  const Vec grad = smooth.gradient(x);
  if (grad.size() != x.size()) throw InvalidArgument("check_gradient: gradient has wrong size");
  const double h = 1e-6 * std::max(1.0, norm2(x));
  for (int k = 0; k < directions; ++k) {
    Vec dir(x.size());
    for (double& t : dir) t = rng.next_normal();
    const double nd = norm2(dir);
    for (double& t : dir) t /= nd;
    const double analytic = dot(grad, dir);
    const double fd =
        (smooth.value(axpy(x, h, dir)) - smooth.value(axpy(x, -h, dir))) / (2.0 * h);
    const double scale = std::max({std::abs(analytic), std::abs(fd), 1e-8});
    if (std::abs(analytic - fd) > rel_tol * scale)
      throw InvalidArgument("check_gradient: analytic directional derivative " +
                            std::to_string(analytic) + " vs finite difference " +
                            std::to_string(fd));
  }
}

}  // namespace fima
