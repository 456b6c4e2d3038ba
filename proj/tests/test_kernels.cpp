#include <cmath>

#include "doctest.h"
#include "fima/kernels.hpp"
#include "test_util.hpp"

using namespace fima;
using namespace fima::testing;
namespace K = fima::kernels;

TEST_CASE("scalar thresholds") {
  CHECK(K::soft_threshold(3.0, 1.0) == 2.0);
  CHECK(K::soft_threshold(-3.0, 1.0) == -2.0);
  CHECK(K::soft_threshold(0.5, 1.0) == 0.0);
  CHECK(K::hard_threshold(2.0, 1.0) == 2.0);
  CHECK(K::hard_threshold(1.0, 1.0) == 0.0);
  // exact tie v^2 == 2 theta resolves to zero
  CHECK(K::hard_threshold(2.0, 2.0) == 0.0);
  CHECK(K::half_threshold(0.0, 1.0) == 0.0);
  CHECK(K::half_threshold(0.01, 1.0) == 0.0);
  CHECK(K::half_threshold(-5.0, 0.1) < 0.0);
}

TEST_CASE("serial and parallel thresholds agree bitwise") {
  const Vec v = random_vec(11, 5000, -3.0, 3.0);
  Vec a(v.size()), b(v.size());
  for (double t : {0.1, 0.7, 2.0}) {
    K::serial::soft_threshold(v, a, t);
    K::parallel::soft_threshold(v, b, t);
    CHECK(bitwise_equal(a, b));
    K::serial::hard_threshold(v, a, t);
    K::parallel::hard_threshold(v, b, t);
    CHECK(bitwise_equal(a, b));
    K::serial::half_threshold(v, a, t);
    K::parallel::half_threshold(v, b, t);
    CHECK(bitwise_equal(a, b));
  }
}

TEST_CASE("serial and parallel image kernels agree bitwise") {
  const K::Dims d{37, 29};
  const Vec img = random_vec(3, d.size(), 0.0, 1.0);
  Vec a(d.size()), b(d.size());

  K::serial::tv_chambolle(img, a, d, 0.1, 25);
  K::parallel::tv_chambolle(img, b, d, 0.1, 25);
  CHECK(bitwise_equal(a, b));

  K::serial::recursive_filter(img, a, d, 0.6);
  K::parallel::recursive_filter(img, b, d, 0.6);
  CHECK(bitwise_equal(a, b));

  const Vec ker = random_vec(5, 25, 0.0, 1.0);
  K::serial::convolve_direct(img, d, ker, {5, 5}, a);
  K::parallel::convolve_direct(img, d, ker, {5, 5}, b);
  CHECK(bitwise_equal(a, b));
}

TEST_CASE("direct convolution matches the triple-loop oracle") {
  for (std::size_t h : {8u, 11u, 16u}) {
    const std::size_t w = h + 3;
    const Vec img = random_vec(h, h * w);
    const Vec ker = random_vec(100 + h, 15);
    Vec out(h * w);
    K::serial::convolve_direct(img, {h, w}, ker, {3, 5}, out);
    CHECK(max_abs_diff(out, naive_convolve(img, h, w, ker, 3, 5)) < 1e-12);
  }
}

TEST_CASE("recursive filter preserves constants and mass") {
  const K::Dims d{16, 20};
  Vec c(d.size(), 0.37), out(d.size());
  K::serial::recursive_filter(c, out, d, 0.8);
  CHECK(max_abs_diff(c, out) < 1e-9);

  Vec impulse(d.size(), 0.0);
  impulse[5 * d.width + 7] = 1.0;
  K::serial::recursive_filter(impulse, out, d, 0.8);
  double mass = 0.0;
  for (double v : out) mass += v;
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));

  K::serial::recursive_filter(impulse, out, d, 0.0);
  CHECK(bitwise_equal(impulse, out));
}

TEST_CASE("Chambolle TV keeps constants") {
  const K::Dims d{12, 12};
  Vec c(d.size(), 0.5), out(d.size());
  K::serial::tv_chambolle(c, out, d, 0.3, 20);
  CHECK(max_abs_diff(c, out) < 1e-12);
}
