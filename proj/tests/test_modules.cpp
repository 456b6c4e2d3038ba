#include <cmath>
#include <string>

#include "doctest.h"
#include "fima/image.hpp"
#include "fima/modules.hpp"
#include "fima/problem.hpp"
#include "fima/solvers.hpp"
#include "test_util.hpp"

using namespace fima;
using namespace fima::testing;

namespace {

Vec checkerboard(kernels::Dims d) {
  Vec v(d.size());
  for (std::size_t i = 0; i < d.height; ++i)
    for (std::size_t j = 0; j < d.width; ++j) v[i * d.width + j] = (i + j) % 2 ? 1.0 : 0.0;
  return v;
}

double mse(ConstView a, ConstView b) { return dist_sq(a, b) / static_cast<double>(a.size()); }

CompositeProblem smoke_problem() {
  return {least_squares(dense_map(random_vec(12, 60), 10, 6), random_vec(13, 10)),
          NonsmoothTerm::from_penalty({PenaltyKind::L1, 0.2})};
}

}  // namespace

TEST_CASE("identity module") {
  const ModulePair m = module_identity();
  CHECK(m.apply(Vec{1.0, 2.0}) == Vec{1.0, 2.0});
  CHECK(m.a_f(Vec{3.0}) == Vec{3.0});
  CHECK(m.a_g(Vec{-4.0}) == Vec{-4.0});
}

TEST_CASE("pg-step module composes to the prox-gradient step") {
  const CompositeProblem p = smoke_problem();
  const double L = estimate_lipschitz(p.smooth, Vec(6, 0.0));
  const ModulePair m = module_pg_step(p, 0.9 / L);
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Vec x = random_vec(s, 6);
    CHECK(bitwise_equal(m.apply(x), prox_gradient_step(p, x, 0.9 / L)));
  }
}

TEST_CASE("eFIMA with the pg-step module descends at least as fast as PG") {
  const CompositeProblem p = smoke_problem();
  const double L = estimate_lipschitz(p.smooth, Vec(6, 0.0));
  SolverConfig cfg;
  cfg.gamma = Schedule::constant(0.99 / L);
  cfg.lipschitz = L;
  cfg.max_iters = 30;
  cfg.iter_error_tol = 0.0;
  const Vec x0(6, 0.0);
  const SolveResult pg = solve_baseline(p, x0, cfg, BaselineVariant::PG);
  const SolveResult ef = solve_efima(p, module_pg_step(p, 0.99 / L), x0, cfg);
  REQUIRE(pg.trace.size() == ef.trace.size());
  for (std::size_t k = 0; k < pg.trace.size(); ++k)
    CHECK(ef.trace.records[k].objective <= pg.trace.records[k].objective + 1e-12);
}

TEST_CASE("TV module examples") {
  const kernels::Dims d{16, 16};
  const Denoiser tv = module_tv_denoise(0.2, 20);
  const Vec c(d.size(), 0.4);
  CHECK(max_abs_diff(tv.apply(c, d), c) <= 1e-12);

  const Vec x = random_vec(3, d.size(), 0.0, 1.0);
  CHECK(norm2(axpy(module_tv_denoise(1e-9, 20).apply(x, d), -1.0, x)) <= 1e-6);

  const Vec cb = checkerboard(d);
  CHECK(total_variation(tv.apply(cb, d), d) < total_variation(cb, d));
  CHECK(bitwise_equal(tv.apply(cb, d), tv.apply(cb, d)));
  CHECK_THROWS_AS(tv.apply(Vec(10, 0.0), d), InvalidArgument);
}

TEST_CASE("recursive filter module examples") {
  const kernels::Dims d{20, 24};
  const Denoiser rf = module_recursive_filter(2.0);
  const Vec c(d.size(), 0.7);
  CHECK(max_abs_diff(rf.apply(c, d), c) <= 1e-9);

  Vec impulse(d.size(), 0.0);
  impulse[7 * d.width + 3] = 1.0;
  double mass = 0.0;
  for (double t : rf.apply(impulse, d)) mass += t;
  CHECK(std::abs(mass - 1.0) <= 1e-6);

  const Vec x = random_vec(4, d.size());
  CHECK(max_abs_diff(module_recursive_filter(1e-3).apply(x, d), x) <= 1e-9);
  CHECK(bitwise_equal(rf.apply(x, d), rf.apply(x, d)));
  CHECK_THROWS_AS(rf.apply(Vec(3, 0.0), d), InvalidArgument);
}

TEST_CASE("total variation of simple images") {
  const kernels::Dims d{4, 4};
  CHECK(total_variation(Vec(16, 1.0), d) == 0.0);
  Vec step(16, 0.0);
  for (std::size_t i = 0; i < 4; ++i) step[i * 4 + 3] = 1.0;
  CHECK(total_variation(step, d) == doctest::Approx(4.0));
}

TEST_CASE("external module: copy command is the identity up to quantisation") {
  const kernels::Dims d{12, 10};
  const Denoiser ext = module_external_denoiser("cp {in} {out}");
  const Vec x = random_vec(5, d.size(), 0.0, 1.0);
  CHECK(max_abs_diff(ext.apply(x, d), x) <= 0.5 / 65535.0 + 1e-12);
}

TEST_CASE("external module: failures surface as ModuleUnavailable") {
  const kernels::Dims d{8, 8};
  const Vec x(d.size(), 0.5);
  CHECK_THROWS_AS(module_external_denoiser("exit 1; {in} {out}").apply(x, d), ModuleUnavailable);
  CHECK_THROWS_AS(module_external_denoiser("true {in} {out}").apply(x, d), ModuleUnavailable);
  CHECK_THROWS_AS(
      module_external_denoiser("sleep 5; cp {in} {out}", std::chrono::milliseconds(200)).apply(x, d),
      ModuleUnavailable);
  CHECK_THROWS_AS(module_external_denoiser("cp in out"), InvalidArgument);
}

TEST_CASE("external module failure becomes a fallback iteration") {
  const kernels::Dims d{8, 8};
  CompositeProblem p{half_squared_distance(Vec(d.size(), 0.25)),
                     NonsmoothTerm::from_penalty({PenaltyKind::L1, 0.01})};
  ModulePair m;
  m.a_f = [](ConstView x) { return Vec(x.begin(), x.end()); };
  m.a_g = as_map(module_external_denoiser("exit 1; {in} {out}"), d);
  m.label = "external";
  SolverConfig cfg;
  cfg.gamma = Schedule::constant(0.5);
  cfg.lipschitz = 1.0;
  cfg.max_iters = 3;
  const Vec x0(d.size(), 1.0);
  const SolveResult r = solve_efima(p, m, x0, cfg);
  const SolveResult pg = solve_baseline(p, x0, cfg, BaselineVariant::PG);
  CHECK(bitwise_equal(r.x, pg.x));
  for (const auto& rec : r.trace.records) {
    CHECK(rec.policy == Policy::Fallback);
    CHECK(!rec.diag.note.empty());
  }
}

TEST_CASE("external module: a blurring command denoises") {
  const kernels::Dims d{48, 48};
  Vec clean(d.size());
  for (std::size_t i = 0; i < d.height; ++i)
    for (std::size_t j = 0; j < d.width; ++j)
      clean[i * d.width + j] = 0.5 + 0.3 * std::sin(0.2 * i) * std::cos(0.15 * j);
  Vec noisy = clean;
  CounterRng rng(99);
  for (std::size_t i = 0; i < noisy.size(); ++i) noisy[i] += 0.08 * rng.normal(i);
  const Denoiser ext =
      module_external_denoiser(std::string(FIMA_EXT_BLUR_PATH) + " {in} {out}");
  const Vec out = ext.apply(noisy, d);
  CHECK(mse(out, clean) < mse(noisy, clean));
}

TEST_CASE("as_map lifts a denoiser to a fixed shape") {
  const kernels::Dims d{6, 6};
  const VecMap f = as_map(module_recursive_filter(1.0), d);
  const Vec x = random_vec(8, d.size());
  CHECK(bitwise_equal(f(x), module_recursive_filter(1.0).apply(x, d)));
}
