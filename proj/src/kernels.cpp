#include "fima/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace fima::kernels {
namespace {

constexpr double kTvStep = 0.125;

inline std::size_t wrap(std::ptrdiff_t i, std::size_t n) {
  const auto m = static_cast<std::ptrdiff_t>(n);
  auto r = i % m;
  return static_cast<std::size_t>(r < 0 ? r + m : r);
}

inline double divergence(const double* px, const double* py, std::size_t i, std::size_t j,
                         Dims d) {
  const std::size_t idx = i * d.width + j;
  double div = 0.0;
  if (j + 1 < d.width) div += px[idx];
  if (j > 0) div -= px[idx - 1];
  if (i + 1 < d.height) div += py[idx];
  if (i > 0) div -= py[idx - d.width];
  return div;
}

inline void tv_dual_update(const double* term, double* px, double* py, std::size_t i,
                           std::size_t j, Dims d) {
  const std::size_t idx = i * d.width + j;
  const double gx = j + 1 < d.width ? term[idx + 1] - term[idx] : 0.0;
  const double gy = i + 1 < d.height ? term[idx + d.width] - term[idx] : 0.0;
  const double denom = 1.0 + kTvStep * std::sqrt(gx * gx + gy * gy);
  px[idx] = (px[idx] + kTvStep * gx) / denom;
  py[idx] = (py[idx] + kTvStep * gy) / denom;
}

// One periodic causal + anti-causal pass over a strided line. The start
// values are the steady-state responses of the circulant filter, so the
// line filter is exactly mass- and constant-preserving.
void filter_line(const double* in, double* out, std::size_t n, std::size_t stride, double a,
                 std::vector<double>& tmp) {
  if (a == 0.0) {
    for (std::size_t t = 0; t < n; ++t) out[t * stride] = in[t * stride];
    return;
  }
  tmp.resize(n);
  const double h0 = (1.0 - a) / (1.0 - std::pow(a, static_cast<double>(n)));

  double init = 0.0, am = 1.0;
  for (std::size_t m = 0; m < n; ++m, am *= a) init += h0 * am * in[(n - 1 - m) * stride];
  double prev = init;
  for (std::size_t t = 0; t < n; ++t) {
    prev = (1.0 - a) * in[t * stride] + a * prev;
    tmp[t] = prev;
  }

  init = 0.0;
  am = 1.0;
  for (std::size_t m = 0; m < n; ++m, am *= a) init += h0 * am * tmp[m];
  double next = init;
  for (std::size_t t = n; t-- > 0;) {
    next = (1.0 - a) * tmp[t] + a * next;
    out[t * stride] = next;
  }
}

inline double convolve_at(const double* image, Dims dims, const double* kernel, Dims kd,
                          std::size_t i, std::size_t j) {
  const auto ch = static_cast<std::ptrdiff_t>(kd.height / 2);
  const auto cw = static_cast<std::ptrdiff_t>(kd.width / 2);
  double acc = 0.0;
  for (std::size_t a = 0; a < kd.height; ++a) {
    const std::size_t r =
        wrap(static_cast<std::ptrdiff_t>(i) - static_cast<std::ptrdiff_t>(a) + ch, dims.height);
    for (std::size_t b = 0; b < kd.width; ++b) {
      const std::size_t c =
          wrap(static_cast<std::ptrdiff_t>(j) - static_cast<std::ptrdiff_t>(b) + cw, dims.width);
      acc += kernel[a * kd.width + b] * image[r * dims.width + c];
    }
  }
  return acc;
}

}  // namespace

namespace serial {

void soft_threshold(std::span<const double> in, std::span<double> out, double t) {
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = kernels::soft_threshold(in[i], t);
}

void hard_threshold(std::span<const double> in, std::span<double> out, double theta) {
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = kernels::hard_threshold(in[i], theta);
}

void half_threshold(std::span<const double> in, std::span<double> out, double theta) {
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = kernels::half_threshold(in[i], theta);
}

void tv_chambolle(std::span<const double> f, std::span<double> out, Dims d, double weight,
                  int iters) {
  const std::size_t n = d.size();
  std::vector<double> px(n, 0.0), py(n, 0.0), term(n);
  for (int it = 0; it < iters; ++it) {
    for (std::size_t i = 0; i < d.height; ++i)
      for (std::size_t j = 0; j < d.width; ++j)
        term[i * d.width + j] =
            divergence(px.data(), py.data(), i, j, d) - f[i * d.width + j] / weight;
    for (std::size_t i = 0; i < d.height; ++i)
      for (std::size_t j = 0; j < d.width; ++j)
        tv_dual_update(term.data(), px.data(), py.data(), i, j, d);
  }
  for (std::size_t i = 0; i < d.height; ++i)
    for (std::size_t j = 0; j < d.width; ++j)
      out[i * d.width + j] =
          f[i * d.width + j] - weight * divergence(px.data(), py.data(), i, j, d);
}

void recursive_filter(std::span<const double> in, std::span<double> out, Dims d, double decay) {
  std::vector<double> rows(d.size()), tmp;
  for (std::size_t i = 0; i < d.height; ++i)
    filter_line(in.data() + i * d.width, rows.data() + i * d.width, d.width, 1, decay, tmp);
  for (std::size_t j = 0; j < d.width; ++j)
    filter_line(rows.data() + j, out.data() + j, d.height, d.width, decay, tmp);
}

void convolve_direct(std::span<const double> image, Dims dims, std::span<const double> kernel,
                     Dims kd, std::span<double> out) {
  for (std::size_t i = 0; i < dims.height; ++i)
    for (std::size_t j = 0; j < dims.width; ++j)
      out[i * dims.width + j] = convolve_at(image.data(), dims, kernel.data(), kd, i, j);
}

}  // namespace serial

namespace parallel {

void soft_threshold(std::span<const double> in, std::span<double> out, double t) {
  const auto n = static_cast<std::ptrdiff_t>(in.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = kernels::soft_threshold(in[i], t);
}

void hard_threshold(std::span<const double> in, std::span<double> out, double theta) {
  const auto n = static_cast<std::ptrdiff_t>(in.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = kernels::hard_threshold(in[i], theta);
}

void half_threshold(std::span<const double> in, std::span<double> out, double theta) {
  const auto n = static_cast<std::ptrdiff_t>(in.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = kernels::half_threshold(in[i], theta);
}

void tv_chambolle(std::span<const double> f, std::span<double> out, Dims d, double weight,
                  int iters) {
  const std::size_t n = d.size();
  std::vector<double> px(n, 0.0), py(n, 0.0), term(n);
  const auto rows = static_cast<std::ptrdiff_t>(d.height);
#pragma omp parallel
  for (int it = 0; it < iters; ++it) {
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < d.width; ++j)
        term[i * d.width + j] =
            divergence(px.data(), py.data(), i, j, d) - f[i * d.width + j] / weight;
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < d.width; ++j)
        tv_dual_update(term.data(), px.data(), py.data(), i, j, d);
  }
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < d.width; ++j)
      out[i * d.width + j] =
          f[i * d.width + j] - weight * divergence(px.data(), py.data(), i, j, d);
}

void recursive_filter(std::span<const double> in, std::span<double> out, Dims d, double decay) {
  std::vector<double> rows(d.size());
  const auto h = static_cast<std::ptrdiff_t>(d.height);
  const auto w = static_cast<std::ptrdiff_t>(d.width);
#pragma omp parallel
  {
    std::vector<double> tmp;
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < h; ++i)
      filter_line(in.data() + i * d.width, rows.data() + i * d.width, d.width, 1, decay, tmp);
#pragma omp for schedule(static)
    for (std::ptrdiff_t j = 0; j < w; ++j)
      filter_line(rows.data() + j, out.data() + j, d.height, d.width, decay, tmp);
  }
}

void convolve_direct(std::span<const double> image, Dims dims, std::span<const double> kernel,
                     Dims kd, std::span<double> out) {
  const auto h = static_cast<std::ptrdiff_t>(dims.height);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < h; ++i)
    for (std::size_t j = 0; j < dims.width; ++j)
      out[i * dims.width + j] = convolve_at(image.data(), dims, kernel.data(), kd, i, j);
}

}  // namespace parallel
}  // namespace fima::kernels
