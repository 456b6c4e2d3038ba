#include "fima/wavelet.hpp"

#include <cmath>
#include <numbers>

namespace fima {
namespace {

constexpr double kInvSqrt2 = 1.0 / std::numbers::sqrt2;

// One analysis step on the top-left h x w block (row pass then column pass).
void analyse(Vec& a, std::size_t stride, std::size_t h, std::size_t w, Vec& tmp) {
  tmp.resize(std::max(h, w));
  for (std::size_t i = 0; i < h; ++i) {
    double* row = a.data() + i * stride;
    for (std::size_t j = 0; j < w / 2; ++j) {
      tmp[j] = (row[2 * j] + row[2 * j + 1]) * kInvSqrt2;
      tmp[w / 2 + j] = (row[2 * j] - row[2 * j + 1]) * kInvSqrt2;
    }
    for (std::size_t j = 0; j < w; ++j) row[j] = tmp[j];
  }
  for (std::size_t j = 0; j < w; ++j) {
    for (std::size_t i = 0; i < h / 2; ++i) {
      const double p = a[(2 * i) * stride + j], q = a[(2 * i + 1) * stride + j];
      tmp[i] = (p + q) * kInvSqrt2;
      tmp[h / 2 + i] = (p - q) * kInvSqrt2;
    }
    for (std::size_t i = 0; i < h; ++i) a[i * stride + j] = tmp[i];
  }
}

void synthesise(Vec& a, std::size_t stride, std::size_t h, std::size_t w, Vec& tmp) {
  tmp.resize(std::max(h, w));
  for (std::size_t j = 0; j < w; ++j) {
    for (std::size_t i = 0; i < h / 2; ++i) {
      const double s = a[i * stride + j], d = a[(h / 2 + i) * stride + j];
      tmp[2 * i] = (s + d) * kInvSqrt2;
      tmp[2 * i + 1] = (s - d) * kInvSqrt2;
    }
    for (std::size_t i = 0; i < h; ++i) a[i * stride + j] = tmp[i];
  }
  for (std::size_t i = 0; i < h; ++i) {
    double* row = a.data() + i * stride;
    for (std::size_t j = 0; j < w / 2; ++j) {
      const double s = row[j], d = row[w / 2 + j];
      tmp[2 * j] = (s + d) * kInvSqrt2;
      tmp[2 * j + 1] = (s - d) * kInvSqrt2;
    }
    for (std::size_t j = 0; j < w; ++j) row[j] = tmp[j];
  }
}

}  // namespace

HaarWavelet::HaarWavelet(kernels::Dims dims, int levels) : dims_(dims), levels_(levels) {
  if (levels < 0) throw InvalidArgument("wavelet: levels must be >= 0");
  if (dims.size() == 0) throw InvalidArgument("wavelet: empty image");
  const std::size_t f = std::size_t{1} << levels;
  if (dims.height % f != 0 || dims.width % f != 0)
    throw InvalidArgument("wavelet: dimensions " + std::to_string(dims.height) + "x" +
                          std::to_string(dims.width) + " not divisible by 2^" +
                          std::to_string(levels));
}

int HaarWavelet::max_levels(kernels::Dims dims, int cap) {
  int l = 0;
  while (l < cap && dims.height % (std::size_t{2} << l) == 0 &&
         dims.width % (std::size_t{2} << l) == 0)
    ++l;
  return l;
}

Vec HaarWavelet::forward(ConstView image) const {
  if (image.size() != dims_.size()) throw InvalidArgument("wavelet forward: size mismatch");
  Vec a(image.begin(), image.end()), tmp;
  std::size_t h = dims_.height, w = dims_.width;
  for (int l = 0; l < levels_; ++l, h /= 2, w /= 2) analyse(a, dims_.width, h, w, tmp);
  return a;
}

Vec HaarWavelet::inverse(ConstView coeffs) const {
  if (coeffs.size() != dims_.size()) throw InvalidArgument("wavelet inverse: size mismatch");
  Vec a(coeffs.begin(), coeffs.end()), tmp;
  for (int l = levels_ - 1; l >= 0; --l)
    synthesise(a, dims_.width, dims_.height >> l, dims_.width >> l, tmp);
  return a;
}

}  // namespace fima
