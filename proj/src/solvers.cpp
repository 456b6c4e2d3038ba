#include "fima/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "fima/random.hpp"

namespace fima {
namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

/// Result of running a module pair on x^k.
struct ModuleOutput {
  std::optional<Vec> u;  // empty when the module reported itself unavailable
  std::string note;
};

void check_module_output(const Vec& out, std::size_t dim, const std::string& label,
                         const char* which, int k) {
  if (out.size() != dim)
    throw ModuleError("module '" + label + "' (" + which + ") changed the dimension at iteration " +
                      std::to_string(k));
  if (!all_finite(out))
    throw ModuleError("module '" + label + "' (" + which +
                      ") produced non-finite output at iteration " + std::to_string(k));
}

ModuleOutput run_modules(const ModulePair& modules, ConstView x, int k) {
  ModuleOutput out;
  try {
    Vec mid = modules.a_f(x);
    check_module_output(mid, x.size(), modules.label, "A_f", k);
    Vec u = modules.a_g(mid);
    check_module_output(u, x.size(), modules.label, "A_g", k);
    out.u = std::move(u);
  } catch (const ModuleUnavailable& e) {
    out.note = e.what();
  }
  return out;
}

/// prox_{gamma g}(v - gamma * grad), the refinement shared by every scheme.
Vec refine(const NonsmoothTerm& g, ConstView v, ConstView grad, double gamma) {
  return g.prox(axpy(v, -gamma, grad), gamma);
}

void check_x0(const CompositeProblem& problem, ConstView x0, const SolverConfig& cfg) {
  if (x0.empty()) throw InvalidArgument("solver: empty initial point");
  require_finite(x0, "solver x0");
  if (cfg.max_iters < 1) throw InvalidArgument("solver: max_iters must be positive");
  if (cfg.check_gradient) check_gradient(problem.smooth, x0);
}

/// Records x^{k+1} and returns whether the run should stop.
bool finish_iteration(IterateTrace& trace, IterateRecord rec, ConstView x_prev, ConstView x_next,
                      double psi_next, const SolverConfig& cfg, Clock::time_point t0) {
  rec.objective = psi_next;
  rec.iter_error = iteration_error(dist(x_next, x_prev), norm2(x_prev));
  rec.recon_error = rec.iter_error * rec.iter_error;
  rec.wall_ms = elapsed_ms(t0);
  trace.push(std::move(rec));
  trace.stop = stopping(trace, cfg.max_iters, cfg.iter_error_tol);
  return trace.stop != StopReason::None;
}

IterateDiagnostics base_diag(const SolverConfig& cfg, double gamma, double psi_x) {
  IterateDiagnostics d;
  d.gamma = gamma;
  d.objective_prev = psi_x;
  if (cfg.lipschitz) d.lipschitz = *cfg.lipschitz;
  return d;
}

}  // namespace

double Schedule::at(int k) const {
  if (values.empty()) throw InvalidArgument("schedule: no values");
  const auto i = std::min<std::size_t>(static_cast<std::size_t>(std::max(k, 0)), values.size() - 1);
  return values[i];
}

void validate(const SolverConfig& cfg, bool error_control) {
  if (cfg.max_iters < 1) throw InvalidArgument("config: max_iters must be positive");
  if (!(cfg.iter_error_tol >= 0.0)) throw InvalidArgument("config: iter_error_tol must be >= 0");
  if (cfg.gamma.empty()) throw InvalidArgument("config: gamma schedule is empty");
  for (double g : cfg.gamma.values) {
    if (!(g > 0.0) || !std::isfinite(g)) throw InvalidArgument("config: gamma must be positive");
    if (cfg.lipschitz && !(g < 1.0 / *cfg.lipschitz))
      throw InvalidArgument("config: gamma " + std::to_string(g) + " violates gamma < 1/L = " +
                            std::to_string(1.0 / *cfg.lipschitz));
  }
  if (!error_control) return;
  if (cfg.mu.empty() || cfg.C.empty()) throw InvalidArgument("config: mu and C schedules required");
  const std::size_t n = std::max(cfg.mu.values.size(), cfg.C.values.size());
  for (std::size_t k = 0; k < n; ++k) {
    const double mu = cfg.mu.at(static_cast<int>(k));
    const double c = cfg.C.at(static_cast<int>(k));
    if (!(c > 0.0) || !(2.0 * c < mu) || !std::isfinite(mu))
      throw InvalidArgument("config: need 0 < 2C < mu (C = " + std::to_string(c) +
                            ", mu = " + std::to_string(mu) + ")");
  }
}

// ---- eFIMA -------------------------------------------------------------------

SolveResult solve_efima(const CompositeProblem& problem, const ModulePair& modules, ConstView x0,
                        const SolverConfig& cfg) {
  check_x0(problem, x0, cfg);
  validate(cfg, false);
  SolveResult res{Vec(x0.begin(), x0.end()), {}};
  Vec& x = res.x;
  double psi_x = objective(problem, x);

  for (int k = 0;; ++k) {
    const auto t0 = Clock::now();
    const double gamma = cfg.gamma.at(k);
    IterateRecord rec;
    rec.k = k + 1;
    rec.diag = base_diag(cfg, gamma, psi_x);

    ModuleOutput mod = run_modules(modules, x, k);
    bool take_u = false;
    double psi_u = kInfiniteObjective;
    if (mod.u) {
      psi_u = objective(problem, *mod.u);
      take_u = psi_u <= psi_x;
    }
    rec.policy = take_u ? Policy::Accept : Policy::Fallback;
    rec.diag.note = std::move(mod.note);
    const Vec& v = take_u ? *mod.u : x;
    rec.diag.objective_monitor = take_u ? psi_u : psi_x;

    Vec x_next = prox_gradient_step(problem, v, gamma);
    const double psi_next = objective(problem, x_next);
    rec.diag.refine_step_sq = dist_sq(x_next, v);
    const bool stop = finish_iteration(res.trace, std::move(rec), x, x_next, psi_next, cfg, t0);
    x = std::move(x_next);
    psi_x = psi_next;
    if (stop) break;
  }
  return res;
}

// ---- iFIMA -------------------------------------------------------------------

SolveResult solve_ifima(const CompositeProblem& problem, const ModulePair& modules, ConstView x0,
                        const SolverConfig& cfg) {
  check_x0(problem, x0, cfg);
  validate(cfg, true);
  SolveResult res{Vec(x0.begin(), x0.end()), {}};
  Vec& x = res.x;
  double psi_x = objective(problem, x);

  for (int k = 0;; ++k) {
    const auto t0 = Clock::now();
    const double gamma = cfg.gamma.at(k);
    const double mu = cfg.mu.at(k);
    const double C = cfg.C.at(k);
    IterateRecord rec;
    rec.k = k + 1;
    rec.diag = base_diag(cfg, gamma, psi_x);
    rec.diag.mu = mu;
    rec.diag.C = C;

    ModuleOutput mod = run_modules(modules, x, k);
    rec.diag.note = std::move(mod.note);

    Vec v, grad_v;
    bool accepted = false;
    if (mod.u) {
      const Vec& u = *mod.u;
      const Vec grad_u = problem.smooth.gradient(u);
      Vec w(u.size());
      for (std::size_t i = 0; i < u.size(); ++i)
        w[i] = u[i] - gamma * (grad_u[i] + mu * (u[i] - x[i]));
      Vec u_tilde = problem.nonsmooth.prox(w, gamma);
      Vec grad_ut = problem.smooth.gradient(u_tilde);
      const ErrorCertificate cert =
          subdiff_error_from_gradients(grad_u, grad_ut, u, u_tilde, x, mu, gamma, C);
      rec.diag.norm_d = cert.norm_d;
      rec.diag.rhs = cert.rhs;
      rec.diag.objective_corrected = objective(problem, u_tilde);
      rec.diag.corrected_dist_sq = dist_sq(u_tilde, x);
      if (cert.accepted) {
        accepted = true;
        v = std::move(u_tilde);
        grad_v = std::move(grad_ut);
        rec.diag.objective_monitor = rec.diag.objective_corrected;
      }
    }
    if (!accepted) {
      v = x;
      grad_v = problem.smooth.gradient(x);
      rec.diag.objective_monitor = psi_x;
    }
    rec.policy = accepted ? Policy::Accept : Policy::Fallback;

    Vec x_next = refine(problem.nonsmooth, v, grad_v, gamma);
    const double psi_next = objective(problem, x_next);
    rec.diag.refine_step_sq = dist_sq(x_next, v);
    const bool stop = finish_iteration(res.trace, std::move(rec), x, x_next, psi_next, cfg, t0);
    x = std::move(x_next);
    psi_x = psi_next;
    if (stop) break;
  }
  return res;
}

// ---- baselines ---------------------------------------------------------------

std::string_view to_string(BaselineVariant v) {
  switch (v) {
    case BaselineVariant::PG: return "pg";
    case BaselineVariant::APG: return "apg";
    case BaselineVariant::MonotoneAPG: return "mapg";
    case BaselineVariant::Inexact: return "inexact";
  }
  return "?";
}

SolveResult solve_baseline(const CompositeProblem& problem, ConstView x0, const SolverConfig& cfg,
                           BaselineVariant variant) {
  check_x0(problem, x0, cfg);
  validate(cfg, false);
  SolveResult res{Vec(x0.begin(), x0.end()), {}};
  Vec& x = res.x;
  Vec x_prev = x;
  double psi_x = objective(problem, x);
  double t = 1.0;

  const bool momentum = variant == BaselineVariant::APG ||
                        variant == BaselineVariant::MonotoneAPG ||
                        (variant == BaselineVariant::Inexact && cfg.nesterov);
  const InexactNoise& noise = cfg.inexact;
  CounterRng grad_rng(noise.seed * 2 + 1), prox_rng(noise.seed * 2 + 2);

  for (int k = 0;; ++k) {
    const auto t0 = Clock::now();
    const double gamma = cfg.gamma.at(k);
    IterateRecord rec;
    rec.k = k + 1;
    rec.diag = base_diag(cfg, gamma, psi_x);
    rec.policy = Policy::Accept;

    Vec y = x;
    double t_next = t;
    if (momentum) {
      t_next = (1.0 + std::sqrt(1.0 + 4.0 * t * t)) / 2.0;
      const double beta = (t - 1.0) / t_next;
      if (beta != 0.0)
        for (std::size_t i = 0; i < y.size(); ++i) y[i] = x[i] + beta * (x[i] - x_prev[i]);
    }

    Vec x_next;
    if (variant == BaselineVariant::Inexact) {
      Vec grad = problem.smooth.gradient(y);
      const double damp = 1.0 / std::pow(static_cast<double>(k + 1), noise.decay);
      if (noise.gradient_scale != 0.0)
        for (double& gi : grad) gi += noise.gradient_scale * damp * grad_rng.next_normal();
      x_next = refine(problem.nonsmooth, y, grad, gamma);
      if (noise.prox_scale != 0.0)
        for (double& xi : x_next) xi += noise.prox_scale * damp * prox_rng.next_normal();
      rec.diag.objective_monitor = objective(problem, y);
    } else {
      x_next = prox_gradient_step(problem, y, gamma);
      rec.diag.objective_monitor = momentum ? objective(problem, y) : psi_x;
    }
    double psi_next = objective(problem, x_next);

    if (variant == BaselineVariant::MonotoneAPG && !(psi_next <= psi_x)) {
      y = x;
      x_next = prox_gradient_step(problem, x, gamma);
      psi_next = objective(problem, x_next);
      rec.policy = Policy::Fallback;
      rec.diag.objective_monitor = psi_x;
    }
    rec.diag.refine_step_sq = dist_sq(x_next, y);

    const bool stop = finish_iteration(res.trace, std::move(rec), x, x_next, psi_next, cfg, t0);
    x_prev = std::move(x);
    x = std::move(x_next);
    psi_x = psi_next;
    t = t_next;
    if (stop) break;
  }
  return res;
}

// ---- mFIMA -------------------------------------------------------------------

double objective(const MultiBlockProblem& problem, const Blocks& x) {
  double g = 0.0;
  for (std::size_t n = 0; n < x.size(); ++n) {
    const double gn = problem.nonsmooth[n].value(x[n]);
    if (is_infinite_objective(gn)) return kInfiniteObjective;
    g += gn;
  }
  return problem.smooth_value(x) + g;
}

MultiBlockModules multiblock_identity(std::size_t blocks) {
  MultiBlockModules m;
  m.label = "identity";
  m.a_f = [](const Blocks& x) { return x; };
  for (std::size_t n = 0; n < blocks; ++n) m.a_g.push_back([n](const Blocks& x) { return x[n]; });
  return m;
}

MultiBlockResult solve_mfima(const MultiBlockProblem& problem, const MultiBlockModules& modules,
                             const Blocks& x0, const MultiBlockConfig& cfg) {
  const std::size_t N = x0.size();
  if (N < 2) throw InvalidArgument("solve_mfima: need at least two blocks");
  if (problem.nonsmooth.size() != N || modules.a_g.size() != N || cfg.blocks.size() != N)
    throw InvalidArgument("solve_mfima: block count mismatch between problem, modules and config");
  if (cfg.max_iters < 1) throw InvalidArgument("solve_mfima: max_iters must be positive");
  for (const auto& s : cfg.blocks) {
    if (!(s.gamma_factor > 0.0 && s.gamma_factor < 1.0))
      throw InvalidArgument("solve_mfima: gamma_factor must lie in (0, 1)");
    if (!(s.mu_factor > 0.0)) throw InvalidArgument("solve_mfima: mu_factor must be positive");
    if (!(s.c_ratio > 0.0 && s.c_ratio < 0.5))
      throw InvalidArgument("solve_mfima: c_ratio must lie in (0, 1/2)");
  }
  for (const auto& b : x0) require_finite(b, "solve_mfima x0");

  MultiBlockResult res{x0, {}};
  Blocks& X = res.x;
  double psi = objective(problem, X);

  for (int k = 0;; ++k) {
    const Blocks X_start = X;
    for (std::size_t n = 0; n < N; ++n) {
      const auto t0 = Clock::now();
      const BlockSchedule& sched = cfg.blocks[n];
      const double L = std::max(problem.partial_lipschitz(X, n), 1e-12);
      const double gamma = sched.gamma_factor / L;
      const double mu = sched.mu_factor / gamma;
      const double C = sched.c_ratio * mu;

      IterateRecord rec;
      rec.k = k + 1;
      rec.block = static_cast<int>(n);
      rec.diag.objective_prev = psi;
      rec.diag.gamma = gamma;
      rec.diag.lipschitz = L;
      rec.diag.mu = mu;
      rec.diag.C = C;
      rec.diag.scale = cfg.scale;

      const Vec& xn = X[n];
      const std::string label = modules.label + "[" + std::to_string(n) + "]";
      std::optional<Vec> u;
      try {
        Blocks mid = modules.a_f(X);
        if (mid.size() != N) throw ModuleError("module '" + label + "' (A_f) changed block count");
        for (std::size_t m = 0; m < N; ++m)
          check_module_output(mid[m], X[m].size(), label, "A_f", k);
        Vec out = modules.a_g[n](mid);
        check_module_output(out, xn.size(), label, "A_g", k);
        u = std::move(out);
      } catch (const ModuleUnavailable& e) {
        rec.diag.note = e.what();
      }

      Blocks probe = X;
      Vec v, grad_v;
      bool accepted = false;
      if (u) {
        probe[n] = *u;
        const Vec grad_u = problem.partial_gradient(probe, n);
        Vec w(xn.size());
        for (std::size_t i = 0; i < w.size(); ++i)
          w[i] = (*u)[i] - gamma * (grad_u[i] + mu * ((*u)[i] - xn[i]));
        Vec u_tilde = problem.nonsmooth[n].prox(w, gamma);
        probe[n] = u_tilde;
        Vec grad_ut = problem.partial_gradient(probe, n);
        const ErrorCertificate cert =
            subdiff_error_from_gradients(grad_u, grad_ut, *u, u_tilde, xn, mu, gamma, C);
        rec.diag.norm_d = cert.norm_d;
        rec.diag.rhs = cert.rhs;
        rec.diag.objective_corrected = objective(problem, probe);
        rec.diag.corrected_dist_sq = dist_sq(u_tilde, xn);
        if (cert.accepted) {
          accepted = true;
          rec.diag.objective_monitor = rec.diag.objective_corrected;
          v = std::move(u_tilde);
          grad_v = std::move(grad_ut);
        }
      }
      if (!accepted) {
        v = xn;
        grad_v = problem.partial_gradient(X, n);
        rec.diag.objective_monitor = psi;
      }
      rec.policy = accepted ? Policy::Accept : Policy::Fallback;

      Vec x_next = refine(problem.nonsmooth[n], v, grad_v, gamma);
      rec.diag.refine_step_sq = dist_sq(x_next, v);
      rec.iter_error = iteration_error(dist(x_next, xn), norm2(xn));
      rec.recon_error = rec.iter_error * rec.iter_error;
      X[n] = std::move(x_next);
      psi = objective(problem, X);
      rec.objective = psi;
      rec.wall_ms = elapsed_ms(t0);
      res.trace.push(std::move(rec));
      if (cfg.on_block_update) cfg.on_block_update(k + 1, n, X);
    }

    double change_sq = 0.0, start_sq = 0.0;
    for (std::size_t n = 0; n < N; ++n) {
      change_sq += dist_sq(X[n], X_start[n]);
      start_sq += dot(X_start[n], X_start[n]);
    }
    const double joint = iteration_error(std::sqrt(change_sq), std::sqrt(start_sq));
    if (joint <= cfg.iter_error_tol) {
      res.trace.stop = StopReason::Tolerance;
      break;
    }
    if (k + 1 >= cfg.max_iters) {
      res.trace.stop = StopReason::Budget;
      break;
    }
  }
  return res;
}

}  // namespace fima
