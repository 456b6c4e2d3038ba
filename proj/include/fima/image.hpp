#pragma once

// Raster and blur-kernel containers plus their file formats.
//
//   images  : binary PGM (P5), 8- or 16-bit on read, always 16-bit on write;
//             PNG (grayscale or colour, converted to luma) on read.
//   kernels : plain text, first line "kh kw", then kh rows of kw reals.

#include <filesystem>
#include <string>

#include "fima/common.hpp"
#include "fima/kernels.hpp"

namespace fima {

struct ImageField {
  std::size_t height = 0;
  std::size_t width = 0;
  Vec pixels;  // row-major

  ImageField() = default;
  ImageField(std::size_t h, std::size_t w, double fill = 0.0);
  ImageField(std::size_t h, std::size_t w, Vec data);

  kernels::Dims dims() const { return {height, width}; }
  std::size_t size() const { return pixels.size(); }
  double& at(std::size_t i, std::size_t j) { return pixels[i * width + j]; }
  double at(std::size_t i, std::size_t j) const { return pixels[i * width + j]; }
};

/// Odd-sized blur kernel; taps are row-major, centre at (height/2, width/2).
struct KernelField {
  std::size_t height = 0;
  std::size_t width = 0;
  Vec taps;

  KernelField() = default;
  KernelField(std::size_t h, std::size_t w, Vec data);

  kernels::Dims dims() const { return {height, width}; }
  double at(std::size_t i, std::size_t j) const { return taps[i * width + j]; }

  static KernelField delta(std::size_t h, std::size_t w);
  static KernelField uniform(std::size_t h, std::size_t w);
  /// Isotropic Gaussian, normalised to unit sum.
  static KernelField gaussian(std::size_t size, double sigma);
  /// Anti-aliased line of the given length and angle (radians), unit sum.
  static KernelField motion_line(std::size_t size, double length, double angle);
};

/// True when taps are nonnegative and sum to one within `tol`.
bool on_simplex(const KernelField& k, double tol = 1e-12);

ImageField read_pgm(const std::filesystem::path& path);
void write_pgm(const ImageField& img, const std::filesystem::path& path);
ImageField read_png(const std::filesystem::path& path);
/// Dispatches on extension (.png, otherwise PGM).
ImageField read_image(const std::filesystem::path& path);

KernelField read_kernel(const std::filesystem::path& path);
void write_kernel(const KernelField& k, const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomically(const std::filesystem::path& path, const std::string& contents);

/// Keys bicubic (a = -0.5) resampling with clamped borders, pixel-centre
/// aligned.
ImageField resize_bicubic(const ImageField& img, std::size_t height, std::size_t width);

/// Bilinear resampling of kernel taps to a new odd size; the result is
/// clamped to >= 0 and renormalised (not projected).
KernelField resize_kernel_bilinear(const KernelField& k, std::size_t height, std::size_t width);

}  // namespace fima
