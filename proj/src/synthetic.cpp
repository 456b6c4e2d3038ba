#include "fima/synthetic.hpp"

#include <cmath>
#include <numbers>

#include "fima/deconv.hpp"
#include "fima/random.hpp"

namespace fima {
namespace {

constexpr std::uint64_t kTextureStream = 0x7465787475726531ULL;
constexpr std::uint64_t kKernelStream = 0x6b65726e656c3031ULL;
constexpr std::uint64_t kNoiseStream = 0x6e6f697365303031ULL;

}  // namespace

std::string_view to_string(KernelKind k) {
  switch (k) {
    case KernelKind::Gaussian: return "gaussian";
    case KernelKind::MotionLine: return "motion";
    case KernelKind::Delta: return "delta";
  }
  return "?";
}

KernelKind parse_kernel_kind(std::string_view text) {
  if (text == "gaussian") return KernelKind::Gaussian;
  if (text == "motion" || text == "motion-line" || text == "motion_line")
    return KernelKind::MotionLine;
  if (text == "delta") return KernelKind::Delta;
  throw InvalidArgument("unknown kernel kind '" + std::string(text) + "'");
}

ImageField procedural_texture(std::uint64_t seed, std::size_t height, std::size_t width) {
  CounterRng rng(seed ^ kTextureStream);
  ImageField z(height, width);
  const double h = static_cast<double>(height), w = static_cast<double>(width);
  const double gx = rng.next_uniform() - 0.5, gy = rng.next_uniform() - 0.5;
  const double base = 0.3 + 0.4 * rng.next_uniform();
  for (std::size_t i = 0; i < height; ++i)
    for (std::size_t j = 0; j < width; ++j)
      z.at(i, j) = base + 0.3 * (gx * (static_cast<double>(j) / w - 0.5) +
                                 gy * (static_cast<double>(i) / h - 0.5));

  const int shapes = 6 + static_cast<int>(rng.next_uniform() * 6);
  for (int s = 0; s < shapes; ++s) {
    const bool disc = rng.next_uniform() < 0.5;
    const double cy = rng.next_uniform() * h, cx = rng.next_uniform() * w;
    const double ry = (0.08 + 0.2 * rng.next_uniform()) * h;
    const double rx = (0.08 + 0.2 * rng.next_uniform()) * w;
    const double level = rng.next_uniform();
    for (std::size_t i = 0; i < height; ++i)
      for (std::size_t j = 0; j < width; ++j) {
        const double dy = (static_cast<double>(i) - cy) / ry;
        const double dx = (static_cast<double>(j) - cx) / rx;
        const bool inside = disc ? dy * dy + dx * dx <= 1.0 : std::abs(dy) <= 1.0 && std::abs(dx) <= 1.0;
        if (inside) z.at(i, j) = level;
      }
  }
  for (double& v : z.pixels) v = std::clamp(v, 0.0, 1.0);
  return z;
}

SyntheticInstance make_synthetic(const SyntheticSpec& spec) {
  if (spec.size < 32) throw InvalidArgument("synthetic: size must be >= 32");
  if (!(spec.noise_level >= 0.0 && spec.noise_level <= 0.1))
    throw InvalidArgument("synthetic: noise_level must be in [0, 0.1]");
  if (spec.kernel_size % 2 == 0 || spec.kernel_size > spec.size)
    throw InvalidArgument("synthetic: kernel_size must be odd and fit the image");

  SyntheticInstance inst;
  inst.z_true = procedural_texture(spec.seed, spec.size, spec.size);
  const std::size_t k = spec.kernel_size;
  switch (spec.kernel) {
    case KernelKind::Gaussian:
      inst.b_true = KernelField::gaussian(
          k, spec.kernel_sigma > 0.0 ? spec.kernel_sigma : static_cast<double>(k) / 5.0);
      break;
    case KernelKind::MotionLine: {
      CounterRng rng(spec.seed ^ kKernelStream);
      const double length = (0.6 + 0.35 * rng.uniform(0)) * static_cast<double>(k - 1);
      const double angle = rng.uniform(1) * std::numbers::pi;
      inst.b_true = KernelField::motion_line(k, length, angle);
      break;
    }
    case KernelKind::Delta: inst.b_true = KernelField::delta(k, k); break;
  }
  inst.y = convolve_circular(inst.z_true, inst.b_true);
  if (spec.noise_level > 0.0) {
    const CounterRng rng(spec.seed ^ kNoiseStream);
    for (std::size_t i = 0; i < inst.y.size(); ++i)
      inst.y.pixels[i] += spec.noise_level * rng.normal(i);
  }
  return inst;
}

}  // namespace fima
