#include "fima/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <memory>
#include <mutex>

namespace fima {
namespace {

// FFTW's planner is not thread-safe; execution on distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct Plan {
  std::size_t n = 0;
  fftw_complex* buf = nullptr;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  Plan(std::size_t h, std::size_t w) : n(h * w) {
    std::lock_guard lock(planner_mutex());
    buf = fftw_alloc_complex(n);
    forward = fftw_plan_dft_2d(static_cast<int>(h), static_cast<int>(w), buf, buf, FFTW_FORWARD,
                               FFTW_ESTIMATE);
    backward = fftw_plan_dft_2d(static_cast<int>(h), static_cast<int>(w), buf, buf,
                                FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  ~Plan() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward);
    fftw_destroy_plan(backward);
    fftw_free(buf);
  }
  Plan(const Plan&) = delete;
  Plan& operator=(const Plan&) = delete;
};

Plan& plan_for(kernels::Dims d) {
  thread_local std::map<std::pair<std::size_t, std::size_t>, std::unique_ptr<Plan>> cache;
  auto& slot = cache[{d.height, d.width}];
  if (!slot) slot = std::make_unique<Plan>(d.height, d.width);
  return *slot;
}

}  // namespace

Spectrum fft2(ConstView image, kernels::Dims dims) {
  if (image.size() != dims.size() || dims.size() == 0)
    throw InvalidArgument("fft2: image size does not match dims");
  Plan& p = plan_for(dims);
  for (std::size_t i = 0; i < p.n; ++i) {
    p.buf[i][0] = image[i];
    p.buf[i][1] = 0.0;
  }
  fftw_execute(p.forward);
  Spectrum s{dims, std::vector<Complex>(p.n)};
  std::memcpy(static_cast<void*>(s.data.data()), p.buf, p.n * sizeof(fftw_complex));
  return s;
}

Vec ifft2_real(const Spectrum& spectrum) {
  Plan& p = plan_for(spectrum.dims);
  std::memcpy(p.buf, spectrum.data.data(), p.n * sizeof(fftw_complex));
  fftw_execute(p.backward);
  Vec out(p.n);
  const double scale = 1.0 / static_cast<double>(p.n);
  for (std::size_t i = 0; i < p.n; ++i) out[i] = p.buf[i][0] * scale;
  return out;
}

Spectrum kernel_spectrum(ConstView taps, kernels::Dims kd, kernels::Dims d) {
  if (kd.height > d.height || kd.width > d.width)
    throw InvalidArgument("kernel larger than image");
  if (taps.size() != kd.size()) throw InvalidArgument("kernel taps do not match kernel dims");
  Vec wrapped(d.size(), 0.0);
  const std::size_t ch = kd.height / 2, cw = kd.width / 2;
  for (std::size_t a = 0; a < kd.height; ++a) {
    const std::size_t r = (a + d.height - ch) % d.height;
    for (std::size_t b = 0; b < kd.width; ++b) {
      const std::size_t c = (b + d.width - cw) % d.width;
      wrapped[r * d.width + c] += taps[a * kd.width + b];
    }
  }
  return fft2(wrapped, d);
}

Spectrum multiply(const Spectrum& a, const Spectrum& b, bool conjugate_b) {
  if (a.data.size() != b.data.size()) throw InvalidArgument("multiply: spectrum size mismatch");
  Spectrum out{a.dims, std::vector<Complex>(a.data.size())};
  for (std::size_t i = 0; i < a.data.size(); ++i)
    out.data[i] = a.data[i] * (conjugate_b ? std::conj(b.data[i]) : b.data[i]);
  return out;
}

}  // namespace fima
