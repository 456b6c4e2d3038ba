#include <cmath>

#include "doctest.h"
#include "fima/deconv.hpp"
#include "fima/metrics.hpp"
#include "fima/synthetic.hpp"
#include "test_util.hpp"

using namespace fima;
using namespace fima::testing;

namespace {

ImageField random_image(std::uint64_t seed, std::size_t h, std::size_t w) {
  return ImageField(h, w, random_vec(seed, h * w, 0.0, 1.0));
}

KernelField shifted(const KernelField& k, std::size_t size, int di, int dj) {
  KernelField out(size, size, Vec(size * size, 0.0));
  const int off = static_cast<int>(size - k.height) / 2;
  for (std::size_t i = 0; i < k.height; ++i)
    for (std::size_t j = 0; j < k.width; ++j)
      out.taps[(i + off + di) * size + (j + off + dj)] = k.taps[i * k.width + j];
  return out;
}

}  // namespace

TEST_CASE("PSNR examples") {
  const ImageField a = random_image(1, 16, 16);
  CHECK(psnr(a, a) == kPsnrCap);
  const ImageField z(8, 8, 0.0), h(8, 8, 0.5);
  CHECK(psnr(z, h) == doctest::Approx(6.0206).epsilon(1e-4));
  CHECK(psnr(z, h, 2.0) == doctest::Approx(6.0206 + 20.0 * std::log10(2.0)).epsilon(1e-6));
  const ImageField b = random_image(2, 16, 16);
  CHECK(psnr(a, b) == psnr(b, a));
  CHECK_THROWS_AS(psnr(a, ImageField(8, 8, 0.0)), InvalidArgument);
  CHECK_THROWS_AS(psnr(a, b, 0.0), InvalidArgument);
}

TEST_CASE("PSNR falls as noise grows") {
  const ImageField z = procedural_texture(3, 32, 32);
  double prev = kPsnrCap + 1.0;
  CounterRng rng(4);
  for (double s : {0.001, 0.003, 0.01, 0.03, 0.1}) {
    ImageField n = z;
    for (std::size_t i = 0; i < n.size(); ++i) n.pixels[i] += s * rng.normal(i);
    const double p = psnr(n, z);
    CHECK(p < prev);
    prev = p;
  }
}

TEST_CASE("SSIM examples") {
  const ImageField a = procedural_texture(5, 32, 32);
  CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-12));
  ImageField inv = a;
  for (double& p : inv.pixels) p = 1.0 - p;
  CHECK(ssim(a, inv) < 0.5);
  const ImageField b = random_image(6, 32, 32);
  CHECK(ssim(a, b) == doctest::Approx(ssim(b, a)).epsilon(1e-12));
  CHECK(ssim(a, b) <= 1.0);
  CHECK(ssim(a, convolve_circular(a, KernelField::gaussian(7, 1.5))) < 1.0);
  CHECK_THROWS_AS(ssim(ImageField(7, 9, 0.0), ImageField(7, 9, 0.0)), InvalidArgument);
}

TEST_CASE("kernel similarity examples") {
  const KernelField m = KernelField::motion_line(7, 5.0, 0.4);
  CHECK(kernel_similarity(m, m) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(kernel_similarity(shifted(m, 11, 1, -2), m) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(kernel_similarity(m, shifted(m, 11, -2, 2)) == doctest::Approx(1.0).epsilon(1e-12));
  const KernelField g = KernelField::gaussian(9, 1.5);
  const double ks = kernel_similarity(g, m);
  CHECK(ks > 0.0);
  CHECK(ks < 1.0);
  CHECK(ks == doctest::Approx(kernel_similarity(m, g)).epsilon(1e-12));
  // negative correlation at every shift clamps to zero
  KernelField neg(3, 3, Vec(9, 0.0));
  neg.taps[4] = -1.0;
  CHECK(kernel_similarity(KernelField::delta(3, 3), neg) == 0.0);
  CHECK_THROWS_AS(kernel_similarity(KernelField(3, 3, Vec(9, 0.0)), m), InvalidArgument);
}

TEST_CASE("error ratio examples") {
  const ImageField z(8, 8, 0.5);
  ImageField kt = z, est = z;
  kt.pixels[0] += 0.1;
  est.pixels[0] += 0.2;
  CHECK(error_rate(est, z, kt) == doctest::Approx(4.0));
  CHECK(error_rate(kt, z, kt) == doctest::Approx(1.0));
  CHECK(error_rate(z, z, kt) == 0.0);

  SyntheticSpec sp;
  sp.seed = 7;
  sp.size = 32;
  const SyntheticInstance inst = make_synthetic(sp);
  NonblindOptions opt;
  opt.max_iters = 20;
  const ImageField zkt = solve_nonblind(inst.y, inst.b_true, opt).image;
  CHECK(error_rate(zkt, inst.z_true, inst.y, inst.b_true, opt) == doctest::Approx(1.0));
}
