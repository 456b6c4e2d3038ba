#pragma once

// Seeded synthetic deblurring instances: y = b * z + sigma N(0, 1).
//
// z is a procedural texture of overlapping flat discs and rectangles on a
// smooth shaded background, in [0, 1]. All draws use CounterRng with
// separate streams for the texture, the kernel and the noise.

#include <cstdint>
#include <string>

#include "fima/image.hpp"

namespace fima {

enum class KernelKind { Gaussian, MotionLine, Delta };

std::string_view to_string(KernelKind k);
KernelKind parse_kernel_kind(std::string_view text);

struct SyntheticSpec {
  std::uint64_t seed = 0;
  std::size_t size = 64;
  KernelKind kernel = KernelKind::Gaussian;
  std::size_t kernel_size = 9;
  /// Gaussian width; <= 0 picks kernel_size / 5.
  double kernel_sigma = 0.0;
  double noise_level = 0.01;
};

struct SyntheticInstance {
  ImageField z_true;
  KernelField b_true;
  ImageField y;
};

/// Throws InvalidArgument unless size >= 32, noise_level in [0, 0.1] and
/// kernel_size is odd and fits.
SyntheticInstance make_synthetic(const SyntheticSpec& spec);

ImageField procedural_texture(std::uint64_t seed, std::size_t height, std::size_t width);

}  // namespace fima
