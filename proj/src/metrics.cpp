#include "fima/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace fima {
namespace {

void same_shape(const ImageField& a, const ImageField& b, const char* what) {
  if (a.height != b.height || a.width != b.width)
    throw InvalidArgument(std::string(what) + ": image dimensions differ");
}

/// Copies k into the centre of an s x s zero array.
Vec pad_to(const KernelField& k, std::size_t s) {
  Vec out(s * s, 0.0);
  const std::size_t oy = (s - k.height) / 2, ox = (s - k.width) / 2;
  for (std::size_t i = 0; i < k.height; ++i)
    for (std::size_t j = 0; j < k.width; ++j) out[(i + oy) * s + j + ox] = k.at(i, j);
  return out;
}

}  // namespace

double psnr(const ImageField& a, const ImageField& b, double peak) {
  same_shape(a, b, "psnr");
  if (!(peak > 0.0)) throw InvalidArgument("psnr: peak must be positive");
  const double mse = dist_sq(a.pixels, b.pixels) / static_cast<double>(a.size());
  if (mse == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(peak * peak / mse));
}

double ssim(const ImageField& a, const ImageField& b, double peak) {
  same_shape(a, b, "ssim");
  constexpr std::size_t kWin = 8;
  if (a.height < kWin || a.width < kWin) throw InvalidArgument("ssim: image smaller than 8x8");
  const double c1 = (0.01 * peak) * (0.01 * peak), c2 = (0.03 * peak) * (0.03 * peak);
  const double inv_n = 1.0 / (kWin * kWin);
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i + kWin <= a.height; ++i)
    for (std::size_t j = 0; j + kWin <= a.width; ++j) {
      double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
      for (std::size_t u = 0; u < kWin; ++u)
        for (std::size_t v = 0; v < kWin; ++v) {
          const double x = a.at(i + u, j + v), y = b.at(i + u, j + v);
          sa += x;
          sb += y;
          saa += x * x;
          sbb += y * y;
          sab += x * y;
        }
      const double ma = sa * inv_n, mb = sb * inv_n;
      const double va = saa * inv_n - ma * ma, vb = sbb * inv_n - mb * mb;
      const double cov = sab * inv_n - ma * mb;
      total += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
      ++count;
    }
  return std::clamp(total / static_cast<double>(count), -1.0, 1.0);
}

double kernel_similarity(const KernelField& estimate, const KernelField& truth) {
  std::size_t s = std::max({estimate.height, estimate.width, truth.height, truth.width});
  if (s % 2 == 0) ++s;
  const Vec e = pad_to(estimate, s), t = pad_to(truth, s);
  const double ne = norm2(e), nt = norm2(t);
  if (ne == 0.0 || nt == 0.0) throw InvalidArgument("kernel_similarity: zero-norm kernel");
  const long r = static_cast<long>(s / 2), n = static_cast<long>(s);
  double best = 0.0;
  for (long dy = -r; dy <= r; ++dy)
    for (long dx = -r; dx <= r; ++dx) {
      double acc = 0.0;
      for (long i = 0; i < n; ++i) {
        const long ti = i - dy;
        if (ti < 0 || ti >= n) continue;
        for (long j = 0; j < n; ++j) {
          const long tj = j - dx;
          if (tj < 0 || tj >= n) continue;
          acc += e[static_cast<std::size_t>(i * n + j)] * t[static_cast<std::size_t>(ti * n + tj)];
        }
      }
      best = std::max(best, acc);
    }
  return std::min(1.0, best / (ne * nt));
}

double error_rate(const ImageField& z_est, const ImageField& z_true, const ImageField& z_kt) {
  same_shape(z_est, z_true, "error_rate");
  same_shape(z_kt, z_true, "error_rate");
  const double num = dist_sq(z_est.pixels, z_true.pixels);
  const double den = dist_sq(z_kt.pixels, z_true.pixels);
  if (den == 0.0) return num == 0.0 ? 1.0 : HUGE_VAL;
  return num / den;
}

double error_rate(const ImageField& z_est, const ImageField& z_true, const ImageField& y,
                  const KernelField& kernel_true, const NonblindOptions& opt) {
  const ImageField z_kt = solve_nonblind(y, kernel_true, opt).image;
  return error_rate(z_est, z_true, z_kt);
}

}  // namespace fima
