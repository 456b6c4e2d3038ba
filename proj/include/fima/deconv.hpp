#pragma once

// Deconvolution applications.
//
// Non-blind: x are orthonormal Haar coefficients of the latent image z,
//   Psi(x) = ||y - B W^T x||^2 + g(x),
// with B circular convolution by a known kernel.
//
// Blind: works on image gradients. Blocks are x (two stacked channels,
// horizontal then vertical forward differences, periodic) and the kernel b,
//   Psi(x, b) = sum_c ||grad_c y - b * x_c||^2 + lambda_x ||x||_0 + chi_simplex(b),
// solved coarse-to-fine with the multi-block solver.

#include <chrono>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "fima/fft.hpp"
#include "fima/image.hpp"
#include "fima/solvers.hpp"
#include "fima/wavelet.hpp"

namespace fima {

/// Periodic 2-D convolution through the FFT. Throws InvalidArgument when the
/// kernel is larger than the image.
ImageField convolve_circular(const ImageField& image, const KernelField& kernel);

/// Forward differences with periodic wrap: [dx (size N), dy (size N)].
Vec image_gradient(const ImageField& image);

// ---- non-blind -----------------------------------------------------------

class NonblindModel {
 public:
  NonblindModel(ImageField y, KernelField kernel, int wavelet_levels);

  const ImageField& observation() const { return y_; }
  const KernelField& kernel() const { return kernel_; }
  const HaarWavelet& wavelet() const { return wavelet_; }
  kernels::Dims dims() const { return y_.dims(); }

  /// D = B W^T as a linear map on coefficient vectors.
  std::shared_ptr<const LinearMap> fidelity_operator() const { return op_; }
  /// f(x) = ||y - D x||^2 with its exact Lipschitz modulus 2 max|B^|^2.
  SmoothTerm smooth() const;
  double lipschitz() const { return lipschitz_; }

  /// W (B^T B + tau I)^{-1} (B^T y + tau W^T x).
  Vec af(ConstView x, double tau) const;
  /// The image-domain solve above without the final wavelet transform.
  Vec solve_normal_equations(ConstView z_anchor, double tau) const;
  /// ||(B^T B + tau I) z - rhs|| / ||rhs|| with rhs = B^T y + tau z_anchor,
  /// evaluated through the spatial operators.
  double normal_equation_residual(ConstView z, ConstView z_anchor, double tau) const;

  Vec blur(ConstView z) const;
  Vec blur_adjoint(ConstView r) const;

 private:
  ImageField y_;
  KernelField kernel_;
  HaarWavelet wavelet_;
  Spectrum kernel_hat_;
  Spectrum y_hat_;
  double lipschitz_ = 0.0;
  std::shared_ptr<const LinearMap> op_;
};

/// af_nonblind(x, y, kernel, tau, W) for one-off use; builds a model.
Vec af_nonblind(ConstView x, const ImageField& y, const KernelField& kernel, double tau,
                int wavelet_levels);

enum class NonblindScheme { PG, APG, MonotoneAPG, EFIMA, IFIMA };

std::string_view to_string(NonblindScheme s);
NonblindScheme parse_nonblind_scheme(std::string_view text);

/// A_g choices. Identity pairs identity A_f with identity A_g; the denoisers
/// are paired with the FFT solve as A_f and act on W^T x.
enum class ModuleKind { Identity, PGStep, TV, RecursiveFilter, External };

std::string_view to_string(ModuleKind m);
ModuleKind parse_module_kind(std::string_view text);

struct ModuleOptions {
  ModuleKind kind = ModuleKind::TV;
  double tau = 1.0;
  double tv_weight = 1e-3;
  int tv_iters = 20;
  double rf_sigma = 1.5;
  std::string external_command;
  std::chrono::milliseconds external_timeout = std::chrono::seconds(30);
};

struct NonblindOptions {
  ScalarPenalty penalty{PenaltyKind::L0, 1e-3};
  NonblindScheme scheme = NonblindScheme::IFIMA;
  ModuleOptions module;
  /// -1 picks the deepest level <= 3 allowed by the image size.
  int wavelet_levels = -1;
  int max_iters = 80;
  double tol = 1e-4;
  double gamma_factor = 0.99;  // gamma = gamma_factor / L
  double mu_factor = 0.9;      // mu = mu_factor / gamma
  double c_ratio = 0.45;       // C = c_ratio * mu
  bool check_gradient = false;
};

struct NonblindResult {
  ImageField image;
  Vec coefficients;
  IterateTrace trace;
  double lipschitz = 0.0;
};

ModulePair make_nonblind_modules(const NonblindModel& model, const CompositeProblem& problem,
                                 const ModuleOptions& opt, double gamma);

NonblindResult solve_nonblind(const ImageField& y, const KernelField& kernel,
                              const NonblindOptions& opt);

// ---- blind ---------------------------------------------------------------

/// Fidelity sum_c ||g_c - b * x_c||^2 at one scale. Holds the observed
/// gradient channels and their spectra.
class BlindModel {
 public:
  BlindModel(ImageField y, kernels::Dims kernel_dims);

  kernels::Dims dims() const { return dims_; }
  kernels::Dims kernel_dims() const { return kdims_; }
  const Vec& observed_gradient() const { return grad_y_; }

  double value(ConstView x, ConstView b) const;
  Vec gradient_x(ConstView x, ConstView b) const;
  Vec gradient_b(ConstView x, ConstView b) const;
  /// 2 max |B^|^2 (exact).
  double lipschitz_x(ConstView b) const;
  /// 2 max_w sum_c |X_c^(w)|^2, an upper bound on the b-block modulus.
  double lipschitz_b(ConstView x) const;

  /// Gram matrix A^T A of the map b -> (b * x_c)_c restricted to the kernel
  /// support (kh*kw square, row-major) and A^T g.
  struct Normal {
    Vec gram;
    Vec rhs;
  };
  Normal kernel_normal_equations(ConstView x) const;

  /// argmin_x ||g - b * x||^2 + tau ||x - anchor||^2 per channel, by FFT.
  Vec solve_x(ConstView b, ConstView anchor, double tau) const;

 private:
  ImageField y_;
  kernels::Dims dims_;
  kernels::Dims kdims_;
  Vec grad_y_;
  Spectrum gy_hat_[2];
};

struct CgOptions {
  int max_iters = 200;
  double rel_tol = 1e-6;
};

/// Solves (G + lambda I) b = r by conjugate gradients from `init` (zero when
/// empty). Throws SubproblemFailure when the relative residual does not reach
/// rel_tol within max_iters.
Vec conjugate_gradient(const Vec& gram, ConstView rhs, double lambda, ConstView init,
                       const CgOptions& opt = {});

/// argmin_b ||grad y - b * x||^2 + lambda_b ||b||^2 over the kernel support
/// (not projected).
KernelField estimate_kernel_cg(const BlindModel& model, ConstView x, double lambda_b,
                               const KernelField* init = nullptr, const CgOptions& opt = {});

struct BlindPair {
  Vec x;
  KernelField b;
};

/// One alternating sweep of argmin ||grad y - b * x||^2 + tau_x ||x - x^k||^2
/// + tau_b ||b - b^k||^2: x by FFT with b = b^k fixed, then b by CG.
BlindPair af_blind(const BlindModel& model, ConstView x, const KernelField& b, double tau_x,
                   double tau_b, const CgOptions& opt = {});

struct BlindOptions {
  double lambda_x = 4e-3;
  double lambda_b = 2.0;
  double tau_x = 1.0;
  double tau_b = 1.0;
  int scales = 3;
  int iters_per_scale = 30;
  double tol = 1e-4;
  /// Gradient-domain denoiser for A_{g_x}; Identity disables it. A_{g_b}
  /// estimates the kernel from the denoised, hard-thresholded gradients.
  ModuleKind x_module = ModuleKind::TV;
  double tv_weight = 0.01;
  int tv_iters = 20;
  double rf_sigma = 1.0;
  /// When false, both modules are the identity.
  bool use_modules = true;
  BlockSchedule x_schedule{0.99, 0.9, 0.45};
  BlockSchedule b_schedule{0.99, 0.9, 0.45};
  CgOptions cg;
  /// Called after every block update at every scale.
  std::function<void(int scale, int sweep, std::size_t block, const Blocks&)> observer;
};

struct BlindResult {
  Vec gradients;  // full-resolution x
  KernelField kernel;
  IterateTrace trace;  // all scales; k keeps counting across scales
};

/// Kernel side length at a pyramid level, rounded to an odd number >= 3.
std::size_t scaled_kernel_size(std::size_t size, double factor);

BlindResult solve_blind(const ImageField& y, std::size_t kernel_size, const BlindOptions& opt);

}  // namespace fima
