// Test helper used as an external denoiser: ext_blur <in.pgm> <out.pgm>
// applies a periodic 3x3 binomial blur.

#include <cstdio>
#include <exception>

#include "fima/image.hpp"
#include "fima/kernels.hpp"

int main(int argc, char** argv) {
  if (argc != 3) return 2;
  try {
    const fima::ImageField in = fima::read_pgm(argv[1]);
    const fima::Vec k{1 / 16.0, 2 / 16.0, 1 / 16.0, 2 / 16.0, 4 / 16.0,
                      2 / 16.0, 1 / 16.0, 2 / 16.0, 1 / 16.0};
    fima::ImageField out(in.height, in.width);
    fima::kernels::serial::convolve_direct(in.pixels, in.dims(), k, {3, 3}, out.pixels);
    fima::write_pgm(out, argv[2]);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 1;
  }
  return 0;
}
