#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace fima {

/// Counter-based generator: draw i is splitmix64(seed + (i + 1) * golden).
/// Standard-library distributions are implementation-defined, so every
/// normal/uniform draw used for synthetic data goes through this type to keep
/// datasets identical across platforms.
///
/// uniform(i) = (bits(i) >> 11) * 2^-53, in [0, 1).
/// normal(i)  = Box-Muller on uniforms (2i, 2i+1), cosine branch.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t bits(std::uint64_t counter) const {
    std::uint64_t z = seed_ + (counter + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  double uniform(std::uint64_t counter) const {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }

  double normal(std::uint64_t counter) const {
    const double u1 = 1.0 - uniform(2 * counter);  // (0, 1]
    const double u2 = uniform(2 * counter + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  // Sequential convenience interface over the same counter space.
  double next_uniform() { return uniform(next_++); }
  double next_normal() { return normal(next_++); }

 private:
  std::uint64_t seed_;
  std::uint64_t next_ = 0;
};

}  // namespace fima
