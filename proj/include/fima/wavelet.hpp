#pragma once

#include "fima/common.hpp"
#include "fima/kernels.hpp"

namespace fima {

/// Orthonormal 2-D Haar transform in the usual Mallat layout: each level
/// splits the current low-pass block into LL | HL over LH | HH. Zero levels is
/// the identity.
class HaarWavelet {
 public:
  HaarWavelet(kernels::Dims dims, int levels);

  /// Largest level count <= cap that keeps both dimensions divisible.
  static int max_levels(kernels::Dims dims, int cap);

  Vec forward(ConstView image) const;
  Vec inverse(ConstView coeffs) const;

  kernels::Dims dims() const { return dims_; }
  int levels() const { return levels_; }

 private:
  kernels::Dims dims_;
  int levels_;
};

}  // namespace fima
