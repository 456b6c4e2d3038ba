#pragma once

// Data-parallel inner loops shared by the prox toolbox, the denoiser modules
// and the deconvolution application.
//
// Every kernel exists twice: `serial::` is the plain reference loop and
// `parallel::` is the OpenMP version the library calls. The two are required
// to agree bit for bit (no reductions are parallelised), which the unit tests
// and the benchmark target check.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>

namespace fima::kernels {

// ---- scalar maps -----------------------------------------------------------

inline double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

/// argmin_x theta*1{x != 0} + (x - v)^2 / 2. Ties (v^2 == 2 theta) go to 0.
inline double hard_threshold(double v, double theta) { return v * v > 2.0 * theta ? v : 0.0; }

/// argmin_x theta*|x|^{1/2} + (x - v)^2 / 2 via the half-thresholding closed
/// form; the nonzero root is compared against x = 0 so ties resolve to 0.
inline double half_threshold(double v, double theta) {
  const double a = std::abs(v);
  if (a == 0.0) return 0.0;
  // closed form is stated for (x - v)^2 + lam |x|^{1/2}
  const double lam = 2.0 * theta;
  const double thresh = std::cbrt(54.0) / 4.0 * std::pow(lam, 2.0 / 3.0);
  if (a <= thresh) return 0.0;
  const double phi = std::acos(lam / 8.0 * std::pow(a / 3.0, -1.5));
  const double x =
      2.0 / 3.0 * a * (1.0 + std::cos(2.0 * std::numbers::pi / 3.0 - 2.0 * phi / 3.0));
  const double obj_x = theta * std::sqrt(x) + 0.5 * (x - a) * (x - a);
  const double obj_0 = 0.5 * a * a;
  if (obj_0 <= obj_x) return 0.0;
  return std::copysign(x, v);
}

// ---- image kernels ---------------------------------------------------------
//
// Images are row-major `height * width` arrays.

struct Dims {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t size() const { return height * width; }
};

namespace serial {

void soft_threshold(std::span<const double> in, std::span<double> out, double t);
void hard_threshold(std::span<const double> in, std::span<double> out, double theta);
void half_threshold(std::span<const double> in, std::span<double> out, double theta);

/// Chambolle dual projection for min_z weight*TV(z) + |z - f|^2 / 2 with
/// Neumann boundaries, fixed step 1/8.
void tv_chambolle(std::span<const double> f, std::span<double> out, Dims dims, double weight,
                  int iters);

/// Periodic first-order recursive smoothing, causal then anti-causal pass
/// along rows, then along columns. `decay` in [0, 1).
void recursive_filter(std::span<const double> in, std::span<double> out, Dims dims,
                      double decay);

/// Periodic spatial convolution with a centred odd-sized kernel.
void convolve_direct(std::span<const double> image, Dims dims, std::span<const double> kernel,
                     Dims kdims, std::span<double> out);

}  // namespace serial

namespace parallel {

void soft_threshold(std::span<const double> in, std::span<double> out, double t);
void hard_threshold(std::span<const double> in, std::span<double> out, double theta);
void half_threshold(std::span<const double> in, std::span<double> out, double theta);
void tv_chambolle(std::span<const double> f, std::span<double> out, Dims dims, double weight,
                  int iters);
void recursive_filter(std::span<const double> in, std::span<double> out, Dims dims,
                      double decay);
void convolve_direct(std::span<const double> image, Dims dims, std::span<const double> kernel,
                     Dims kdims, std::span<double> out);

}  // namespace parallel

}  // namespace fima::kernels
