#pragma once

// Image and kernel quality metrics.
//
// SSIM: 8x8 uniform window at every position (stride 1), biased (1/N)
// moments, C1 = (0.01 peak)^2, C2 = (0.03 peak)^2, averaged over windows.
// KS: zero-pad both kernels to a common odd size s, then take the maximum
// normalised cross-correlation over integer shifts in [-s/2, s/2]^2,
// clamped at 0.

#include <optional>

#include "fima/deconv.hpp"
#include "fima/image.hpp"

namespace fima {

inline constexpr double kPsnrCap = 99.0;

/// 10 log10(peak^2 / MSE), capped at 99 dB.
double psnr(const ImageField& a, const ImageField& b, double peak = 1.0);

double ssim(const ImageField& a, const ImageField& b, double peak = 1.0);

double kernel_similarity(const KernelField& estimate, const KernelField& truth);

/// ||z_est - z_true||^2 / ||z_kt - z_true||^2.
double error_rate(const ImageField& z_est, const ImageField& z_true, const ImageField& z_kt);

/// As above, with z_kt the non-blind solve of y with the true kernel.
double error_rate(const ImageField& z_est, const ImageField& z_true, const ImageField& y,
                  const KernelField& kernel_true, const NonblindOptions& opt);

struct MetricReport {
  double psnr = 0.0;
  double ssim = 0.0;
  std::optional<double> kernel_similarity;
  std::optional<double> error_rate;
};

}  // namespace fima
