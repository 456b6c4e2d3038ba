#pragma once

// 2-D discrete Fourier transforms over periodic images (FFTW backend).
// Plans are cached per thread and shape; buffers are FFTW-aligned so repeated
// transforms of the same data are bitwise reproducible.

#include <complex>
#include <vector>

#include "fima/common.hpp"
#include "fima/kernels.hpp"

namespace fima {

using Complex = std::complex<double>;

struct Spectrum {
  kernels::Dims dims;
  std::vector<Complex> data;
};

Spectrum fft2(ConstView image, kernels::Dims dims);
/// Inverse transform (normalised by 1/N), real part.
Vec ifft2_real(const Spectrum& spectrum);

/// Transfer function of a centred odd-sized kernel wrapped onto an image
/// grid. Throws InvalidArgument when the kernel does not fit.
Spectrum kernel_spectrum(ConstView taps, kernels::Dims kdims, kernels::Dims image_dims);

/// Pointwise a * b (or a * conj(b)).
Spectrum multiply(const Spectrum& a, const Spectrum& b, bool conjugate_b = false);

}  // namespace fima
