#include "fima/deconv.hpp"

#include <algorithm>
#include <cmath>

#include "fima/modules.hpp"

namespace fima {
namespace {

using kernels::Dims;

double max_power(const Spectrum& s) {
  double m = 0.0;
  for (const Complex& c : s.data) m = std::max(m, std::norm(c));
  return m;
}

Vec blur_with(const Spectrum& k_hat, ConstView z, bool adjoint) {
  return ifft2_real(multiply(fft2(z, k_hat.dims), k_hat, adjoint));
}

ConstView channel(ConstView x, std::size_t c, std::size_t n) { return x.subspan(c * n, n); }

void check_fits(const KernelField& k, Dims d) {
  if (k.height > d.height || k.width > d.width) throw InvalidArgument("kernel larger than image");
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return out;
}

}  // namespace

ImageField convolve_circular(const ImageField& image, const KernelField& kernel) {
  check_fits(kernel, image.dims());
  const Spectrum k_hat = kernel_spectrum(kernel.taps, kernel.dims(), image.dims());
  return ImageField(image.height, image.width, blur_with(k_hat, image.pixels, false));
}

Vec image_gradient(const ImageField& image) {
  const std::size_t h = image.height, w = image.width, n = h * w;
  Vec g(2 * n);
  for (std::size_t i = 0; i < h; ++i)
    for (std::size_t j = 0; j < w; ++j) {
      g[i * w + j] = image.at(i, (j + 1) % w) - image.at(i, j);
      g[n + i * w + j] = image.at((i + 1) % h, j) - image.at(i, j);
    }
  return g;
}

// ---- non-blind -----------------------------------------------------------

NonblindModel::NonblindModel(ImageField y, KernelField kernel, int wavelet_levels)
    : y_(std::move(y)),
      kernel_(std::move(kernel)),
      wavelet_(y_.dims(), wavelet_levels < 0 ? HaarWavelet::max_levels(y_.dims(), 3)
                                             : wavelet_levels) {
  require_finite(y_.pixels, "observation");
  require_finite(kernel_.taps, "kernel");
  check_fits(kernel_, y_.dims());
  kernel_hat_ = kernel_spectrum(kernel_.taps, kernel_.dims(), y_.dims());
  y_hat_ = fft2(y_.pixels, y_.dims());
  lipschitz_ = 2.0 * max_power(kernel_hat_);

  auto op = std::make_shared<LinearMap>();
  op->in_dim = op->out_dim = y_.size();
  op->apply = [this](ConstView x) { return blur(wavelet_.inverse(x)); };
  op->apply_adjoint = [this](ConstView r) { return wavelet_.forward(blur_adjoint(r)); };
  op_ = std::move(op);
}

SmoothTerm NonblindModel::smooth() const {
  SmoothTerm f = least_squares(op_, y_.pixels);
  f.lipschitz = lipschitz_;
  return f;
}

Vec NonblindModel::blur(ConstView z) const { return blur_with(kernel_hat_, z, false); }
Vec NonblindModel::blur_adjoint(ConstView r) const { return blur_with(kernel_hat_, r, true); }

Vec NonblindModel::solve_normal_equations(ConstView z_anchor, double tau) const {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw InvalidArgument("af_nonblind: tau must be > 0");
  if (z_anchor.size() != y_.size()) throw InvalidArgument("af_nonblind: size mismatch");
  const Spectrum a_hat = fft2(z_anchor, y_.dims());
  Spectrum z_hat{y_.dims(), std::vector<Complex>(y_.size())};
  for (std::size_t i = 0; i < z_hat.data.size(); ++i) {
    const Complex& k = kernel_hat_.data[i];
    z_hat.data[i] = (std::conj(k) * y_hat_.data[i] + tau * a_hat.data[i]) / (std::norm(k) + tau);
  }
  return ifft2_real(z_hat);
}

Vec NonblindModel::af(ConstView x, double tau) const {
  return wavelet_.forward(solve_normal_equations(wavelet_.inverse(x), tau));
}

double NonblindModel::normal_equation_residual(ConstView z, ConstView z_anchor, double tau) const {
  const Dims d = y_.dims();
  const Dims kd = kernel_.dims();
  Vec flipped(kernel_.taps.rbegin(), kernel_.taps.rend());
  Vec bz(d.size()), btbz(d.size()), bty(d.size());
  kernels::serial::convolve_direct(z, d, kernel_.taps, kd, bz);
  kernels::serial::convolve_direct(bz, d, flipped, kd, btbz);
  kernels::serial::convolve_direct(y_.pixels, d, flipped, kd, bty);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double rhs = bty[i] + tau * z_anchor[i];
    const double r = btbz[i] + tau * z[i] - rhs;
    num += r * r;
    den += rhs * rhs;
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

Vec af_nonblind(ConstView x, const ImageField& y, const KernelField& kernel, double tau,
                int wavelet_levels) {
  return NonblindModel(y, kernel, wavelet_levels).af(x, tau);
}

std::string_view to_string(NonblindScheme s) {
  switch (s) {
    case NonblindScheme::PG: return "pg";
    case NonblindScheme::APG: return "apg";
    case NonblindScheme::MonotoneAPG: return "mapg";
    case NonblindScheme::EFIMA: return "efima";
    case NonblindScheme::IFIMA: return "ifima";
  }
  return "?";
}

NonblindScheme parse_nonblind_scheme(std::string_view text) {
  const std::string t = lower(text);
  if (t == "pg") return NonblindScheme::PG;
  if (t == "apg") return NonblindScheme::APG;
  if (t == "mapg") return NonblindScheme::MonotoneAPG;
  if (t == "efima") return NonblindScheme::EFIMA;
  if (t == "ifima") return NonblindScheme::IFIMA;
  throw InvalidArgument("unknown scheme '" + std::string(text) + "'");
}

std::string_view to_string(ModuleKind m) {
  switch (m) {
    case ModuleKind::Identity: return "identity";
    case ModuleKind::PGStep: return "pg";
    case ModuleKind::TV: return "tv";
    case ModuleKind::RecursiveFilter: return "rf";
    case ModuleKind::External: return "external";
  }
  return "?";
}

ModuleKind parse_module_kind(std::string_view text) {
  const std::string t = lower(text);
  if (t == "identity" || t == "none") return ModuleKind::Identity;
  if (t == "pg") return ModuleKind::PGStep;
  if (t == "tv") return ModuleKind::TV;
  if (t == "rf") return ModuleKind::RecursiveFilter;
  if (t == "external" || t == "cnn") return ModuleKind::External;
  throw InvalidArgument("unknown module '" + std::string(text) + "'");
}

namespace {

Denoiser make_denoiser(ModuleKind kind, double tv_weight, int tv_iters, double rf_sigma,
                       const std::string& command, std::chrono::milliseconds timeout) {
  switch (kind) {
    case ModuleKind::TV: return module_tv_denoise(tv_weight, tv_iters);
    case ModuleKind::RecursiveFilter: return module_recursive_filter(rf_sigma);
    case ModuleKind::External: return module_external_denoiser(command, timeout);
    default: break;
  }
  throw InvalidArgument("module '" + std::string(to_string(kind)) + "' is not a denoiser");
}

}  // namespace

ModulePair make_nonblind_modules(const NonblindModel& model, const CompositeProblem& problem,
                                 const ModuleOptions& opt, double gamma) {
  if (opt.kind == ModuleKind::Identity) return module_identity();
  if (opt.kind == ModuleKind::PGStep) return module_pg_step(problem, gamma);
  if (!(opt.tau > 0.0)) throw InvalidArgument("module tau must be > 0");
  Denoiser den = make_denoiser(opt.kind, opt.tv_weight, opt.tv_iters, opt.rf_sigma,
                               opt.external_command, opt.external_timeout);
  ModulePair m;
  const double tau = opt.tau;
  m.a_f = [&model, tau](ConstView x) { return model.af(x, tau); };
  m.a_g = [&model, den](ConstView x) {
    const HaarWavelet& w = model.wavelet();
    return w.forward(den.apply(w.inverse(x), model.dims()));
  };
  m.label = "af+" + den.label;
  return m;
}

NonblindResult solve_nonblind(const ImageField& y, const KernelField& kernel,
                              const NonblindOptions& opt) {
  switch (opt.penalty.kind) {
    case PenaltyKind::L1:
    case PenaltyKind::L0:
    case PenaltyKind::LpHalf: break;
    default:
      throw InvalidArgument("non-blind penalty must be l1, l0 or lp_half, got '" +
                            std::string(to_string(opt.penalty.kind)) + "'");
  }
  const NonblindModel model(y, kernel, opt.wavelet_levels);
  const CompositeProblem problem{model.smooth(), NonsmoothTerm::from_penalty(opt.penalty)};
  const double L = model.lipschitz();
  const double gamma = opt.gamma_factor / L;
  const double mu = opt.mu_factor / gamma;

  SolverConfig cfg;
  cfg.max_iters = opt.max_iters;
  cfg.iter_error_tol = opt.tol;
  cfg.gamma = Schedule::constant(gamma);
  cfg.mu = Schedule::constant(mu);
  cfg.C = Schedule::constant(opt.c_ratio * mu);
  cfg.lipschitz = L;
  cfg.check_gradient = opt.check_gradient;

  const Vec x0 = model.wavelet().forward(y.pixels);
  SolveResult r;
  switch (opt.scheme) {
    case NonblindScheme::PG: r = solve_baseline(problem, x0, cfg, BaselineVariant::PG); break;
    case NonblindScheme::APG: r = solve_baseline(problem, x0, cfg, BaselineVariant::APG); break;
    case NonblindScheme::MonotoneAPG:
      r = solve_baseline(problem, x0, cfg, BaselineVariant::MonotoneAPG);
      break;
    case NonblindScheme::EFIMA:
      r = solve_efima(problem, make_nonblind_modules(model, problem, opt.module, gamma), x0, cfg);
      break;
    case NonblindScheme::IFIMA:
      r = solve_ifima(problem, make_nonblind_modules(model, problem, opt.module, gamma), x0, cfg);
      break;
  }
  NonblindResult out;
  out.image = ImageField(y.height, y.width, model.wavelet().inverse(r.x));
  out.coefficients = std::move(r.x);
  out.trace = std::move(r.trace);
  out.lipschitz = L;
  return out;
}

// ---- blind ---------------------------------------------------------------

BlindModel::BlindModel(ImageField y, Dims kernel_dims)
    : y_(std::move(y)), dims_(y_.dims()), kdims_(kernel_dims) {
  require_finite(y_.pixels, "observation");
  if (kdims_.height % 2 == 0 || kdims_.width % 2 == 0 || kdims_.size() == 0)
    throw InvalidArgument("kernel size must be odd");
  if (kdims_.height > dims_.height || kdims_.width > dims_.width)
    throw InvalidArgument("kernel larger than image");
  grad_y_ = image_gradient(y_);
  for (std::size_t c = 0; c < 2; ++c) gy_hat_[c] = fft2(channel(grad_y_, c, dims_.size()), dims_);
}

double BlindModel::value(ConstView x, ConstView b) const {
  const std::size_t n = dims_.size();
  const Spectrum k_hat = kernel_spectrum(b, kdims_, dims_);
  double s = 0.0;
  for (std::size_t c = 0; c < 2; ++c) {
    const Vec bx = blur_with(k_hat, channel(x, c, n), false);
    s += dist_sq(bx, channel(grad_y_, c, n));
  }
  return s;
}

Vec BlindModel::gradient_x(ConstView x, ConstView b) const {
  const std::size_t n = dims_.size();
  const Spectrum k_hat = kernel_spectrum(b, kdims_, dims_);
  Vec g(2 * n);
  for (std::size_t c = 0; c < 2; ++c) {
    Spectrum r = multiply(fft2(channel(x, c, n), dims_), k_hat);
    for (std::size_t i = 0; i < n; ++i) r.data[i] -= gy_hat_[c].data[i];
    const Vec bt = ifft2_real(multiply(r, k_hat, true));
    for (std::size_t i = 0; i < n; ++i) g[c * n + i] = 2.0 * bt[i];
  }
  return g;
}

BlindModel::Normal BlindModel::kernel_normal_equations(ConstView x) const {
  const std::size_t n = dims_.size(), h = dims_.height, w = dims_.width;
  const std::size_t m = kdims_.size();
  const long ch = static_cast<long>(kdims_.height / 2), cw = static_cast<long>(kdims_.width / 2);
  Vec auto_corr(n, 0.0), cross(n, 0.0);
  for (std::size_t c = 0; c < 2; ++c) {
    const Spectrum x_hat = fft2(channel(x, c, n), dims_);
    Spectrum power{dims_, std::vector<Complex>(n)};
    for (std::size_t i = 0; i < n; ++i) power.data[i] = std::norm(x_hat.data[i]);
    const Vec ac = ifft2_real(power);
    const Vec cc = ifft2_real(multiply(gy_hat_[c], x_hat, true));
    for (std::size_t i = 0; i < n; ++i) {
      auto_corr[i] += ac[i];
      cross[i] += cc[i];
    }
  }
  auto wrap = [](long v, std::size_t len) {
    const long l = static_cast<long>(len);
    return static_cast<std::size_t>(((v % l) + l) % l);
  };
  Normal ne{Vec(m * m), Vec(m)};
  for (std::size_t a = 0; a < m; ++a) {
    const long sa_r = static_cast<long>(a / kdims_.width) - ch;
    const long sa_c = static_cast<long>(a % kdims_.width) - cw;
    ne.rhs[a] = cross[wrap(sa_r, h) * w + wrap(sa_c, w)];
    for (std::size_t a2 = 0; a2 < m; ++a2) {
      const long sb_r = static_cast<long>(a2 / kdims_.width) - ch;
      const long sb_c = static_cast<long>(a2 % kdims_.width) - cw;
      ne.gram[a * m + a2] = auto_corr[wrap(sa_r - sb_r, h) * w + wrap(sa_c - sb_c, w)];
    }
  }
  // symmetrise away FFT round-off so CG sees an exactly symmetric matrix
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t a2 = a + 1; a2 < m; ++a2) {
      const double s = 0.5 * (ne.gram[a * m + a2] + ne.gram[a2 * m + a]);
      ne.gram[a * m + a2] = ne.gram[a2 * m + a] = s;
    }
  return ne;
}

Vec BlindModel::gradient_b(ConstView x, ConstView b) const {
  const Normal ne = kernel_normal_equations(x);
  const std::size_t m = kdims_.size();
  Vec g(m);
  for (std::size_t a = 0; a < m; ++a) {
    double s = 0.0;
    for (std::size_t a2 = 0; a2 < m; ++a2) s += ne.gram[a * m + a2] * b[a2];
    g[a] = 2.0 * (s - ne.rhs[a]);
  }
  return g;
}

double BlindModel::lipschitz_x(ConstView b) const {
  return 2.0 * max_power(kernel_spectrum(b, kdims_, dims_));
}

double BlindModel::lipschitz_b(ConstView x) const {
  const std::size_t n = dims_.size();
  Vec total(n, 0.0);
  for (std::size_t c = 0; c < 2; ++c) {
    const Spectrum x_hat = fft2(channel(x, c, n), dims_);
    for (std::size_t i = 0; i < n; ++i) total[i] += std::norm(x_hat.data[i]);
  }
  return 2.0 * *std::max_element(total.begin(), total.end());
}

Vec BlindModel::solve_x(ConstView b, ConstView anchor, double tau) const {
  if (!(tau > 0.0)) throw InvalidArgument("af_blind: tau_x must be > 0");
  const std::size_t n = dims_.size();
  const Spectrum k_hat = kernel_spectrum(b, kdims_, dims_);
  Vec out(2 * n);
  for (std::size_t c = 0; c < 2; ++c) {
    Spectrum s = fft2(channel(anchor, c, n), dims_);
    for (std::size_t i = 0; i < n; ++i) {
      const Complex& k = k_hat.data[i];
      s.data[i] = (std::conj(k) * gy_hat_[c].data[i] + tau * s.data[i]) / (std::norm(k) + tau);
    }
    const Vec xc = ifft2_real(s);
    std::copy(xc.begin(), xc.end(), out.begin() + static_cast<long>(c * n));
  }
  return out;
}

Vec conjugate_gradient(const Vec& gram, ConstView rhs, double lambda, ConstView init,
                       const CgOptions& opt) {
  const std::size_t m = rhs.size();
  if (gram.size() != m * m) throw InvalidArgument("conjugate_gradient: matrix size mismatch");
  if (!init.empty() && init.size() != m)
    throw InvalidArgument("conjugate_gradient: initial point size mismatch");
  auto apply = [&](const Vec& v) {
    Vec out(m);
    for (std::size_t i = 0; i < m; ++i) {
      double s = lambda * v[i];
      for (std::size_t j = 0; j < m; ++j) s += gram[i * m + j] * v[j];
      out[i] = s;
    }
    return out;
  };
  Vec b = init.empty() ? Vec(m, 0.0) : Vec(init.begin(), init.end());
  const double rhs_norm = norm2(rhs);
  if (rhs_norm == 0.0 && init.empty()) return b;
  const double target = opt.rel_tol * (rhs_norm > 0.0 ? rhs_norm : 1.0);
  Vec r = axpy(rhs, -1.0, apply(b));
  double rr = dot(r, r);
  if (std::sqrt(rr) <= target) return b;
  Vec p = r;
  for (int it = 0; it < opt.max_iters; ++it) {
    const Vec ap = apply(p);
    const double pap = dot(p, ap);
    if (!(pap > 0.0)) break;
    const double alpha = rr / pap;
    for (std::size_t i = 0; i < m; ++i) {
      b[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    const double rr_next = dot(r, r);
    if (std::sqrt(rr_next) <= target) return b;
    const double beta = rr_next / rr;
    rr = rr_next;
    for (std::size_t i = 0; i < m; ++i) p[i] = r[i] + beta * p[i];
  }
  // recurrence drift: confirm with the true residual before giving up
  const Vec true_r = axpy(rhs, -1.0, apply(b));
  if (norm2(true_r) <= target) return b;
  throw SubproblemFailure("conjugate gradient did not reach relative residual " +
                          std::to_string(opt.rel_tol) + " within " +
                          std::to_string(opt.max_iters) + " iterations");
}

KernelField estimate_kernel_cg(const BlindModel& model, ConstView x, double lambda_b,
                               const KernelField* init, const CgOptions& opt) {
  if (!(lambda_b > 0.0)) throw InvalidArgument("estimate_kernel_cg: lambda_b must be > 0");
  const BlindModel::Normal ne = model.kernel_normal_equations(x);
  const Dims kd = model.kernel_dims();
  ConstView start;
  if (init) {
    if (init->height != kd.height || init->width != kd.width)
      throw InvalidArgument("estimate_kernel_cg: initial kernel has the wrong size");
    start = init->taps;
  }
  return KernelField(kd.height, kd.width, conjugate_gradient(ne.gram, ne.rhs, lambda_b, start, opt));
}

BlindPair af_blind(const BlindModel& model, ConstView x, const KernelField& b, double tau_x,
                   double tau_b, const CgOptions& opt) {
  if (!(tau_b > 0.0)) throw InvalidArgument("af_blind: tau_b must be > 0");
  BlindPair out;
  out.x = model.solve_x(b.taps, x, tau_x);
  BlindModel::Normal ne = model.kernel_normal_equations(out.x);
  for (std::size_t a = 0; a < ne.rhs.size(); ++a) ne.rhs[a] += tau_b * b.taps[a];
  out.b = KernelField(b.height, b.width, conjugate_gradient(ne.gram, ne.rhs, tau_b, b.taps, opt));
  return out;
}

std::size_t scaled_kernel_size(std::size_t size, double factor) {
  const double s = static_cast<double>(size) * factor;
  std::size_t k = 2 * static_cast<std::size_t>(std::floor(s / 2.0)) + 1;
  k = std::max<std::size_t>(k, 3);
  return std::min(k, size % 2 == 1 ? size : size + 1);
}

BlindResult solve_blind(const ImageField& y, std::size_t kernel_size, const BlindOptions& opt) {
  if (kernel_size % 2 == 0 || kernel_size == 0) throw InvalidArgument("kernel_size must be odd");
  if (opt.scales < 1) throw InvalidArgument("scales must be >= 1");
  if (!(opt.lambda_x >= 0.0) || !(opt.lambda_b > 0.0))
    throw InvalidArgument("lambda_x must be >= 0 and lambda_b > 0");
  if (!(opt.tau_x > 0.0) || !(opt.tau_b > 0.0)) throw InvalidArgument("tau_x and tau_b must be > 0");
  if (kernel_size > y.height || kernel_size > y.width)
    throw InvalidArgument("kernel larger than image");

  BlindResult res;
  KernelField b;
  int k_offset = 0;
  for (int s = opt.scales - 1; s >= 0; --s) {
    const double f = std::pow(0.75, s);
    const std::size_t ks = s == 0 ? kernel_size : scaled_kernel_size(kernel_size, f);
    const std::size_t hs = std::max(ks, static_cast<std::size_t>(std::lround(y.height * f)));
    const std::size_t ws = std::max(ks, static_cast<std::size_t>(std::lround(y.width * f)));
    const ImageField ys = s == 0 ? y : resize_bicubic(y, hs, ws);
    const BlindModel model(ys, {ks, ks});
    const std::size_t n = ys.size();

    if (b.taps.empty())
      b = KernelField::delta(ks, ks);
    else if (b.height != ks)
      b = KernelField(ks, ks, project_simplex(resize_kernel_bilinear(b, ks, ks).taps));

    MultiBlockProblem problem;
    problem.smooth_value = [&model](const Blocks& X) { return model.value(X[0], X[1]); };
    problem.partial_gradient = [&model](const Blocks& X, std::size_t i) {
      return i == 0 ? model.gradient_x(X[0], X[1]) : model.gradient_b(X[0], X[1]);
    };
    problem.partial_lipschitz = [&model](const Blocks& X, std::size_t i) {
      return i == 0 ? model.lipschitz_x(X[1]) : model.lipschitz_b(X[0]);
    };
    problem.nonsmooth = {NonsmoothTerm::from_penalty({PenaltyKind::L0, opt.lambda_x}),
                         NonsmoothTerm::from_penalty({PenaltyKind::SimplexIndicator, 0.0})};

    MultiBlockModules modules = multiblock_identity(2);
    if (opt.use_modules) {
      const Dims d = ys.dims();
      std::function<Vec(ConstView)> denoise = [](ConstView v) { return Vec(v.begin(), v.end()); };
      if (opt.x_module != ModuleKind::Identity) {
        const Denoiser den =
            make_denoiser(opt.x_module, opt.tv_weight, opt.tv_iters, opt.rf_sigma, {}, {});
        denoise = [den, d, n](ConstView v) {
          Vec out(2 * n);
          for (std::size_t c = 0; c < 2; ++c) {
            const Vec o = den.apply(v.subspan(c * n, n), d);
            std::copy(o.begin(), o.end(), out.begin() + static_cast<long>(c * n));
          }
          return out;
        };
      }
      const double tau_x = opt.tau_x, tau_b = opt.tau_b, lambda_b = opt.lambda_b;
      const double lambda_x = opt.lambda_x;
      const CgOptions cg = opt.cg;
      modules.a_f = [&model, tau_x, tau_b, cg](const Blocks& X) {
        BlindPair p = af_blind(model, X[0], KernelField(model.kernel_dims().height,
                                                        model.kernel_dims().width, X[1]),
                               tau_x, tau_b, cg);
        return Blocks{std::move(p.x), std::move(p.b.taps)};
      };
      modules.a_g[0] = [denoise](const Blocks& T) { return denoise(T[0]); };
      modules.a_g[1] = [&model, denoise, lambda_b, lambda_x, cg, ks](const Blocks& T) {
        // kernel from the denoised gradients with weak edges removed
        Vec xs = denoise(T[0]);
        const double theta = lambda_x / model.lipschitz_x(T[1]);
        for (double& v : xs) v = kernels::hard_threshold(v, theta);
        const KernelField init(ks, ks, T[1]);
        return estimate_kernel_cg(model, xs, lambda_b, &init, cg).taps;
      };
      modules.label = "af_blind+" + std::string(to_string(opt.x_module)) + "+kernel_cg";
    }

    MultiBlockConfig cfg;
    cfg.max_iters = opt.iters_per_scale;
    cfg.iter_error_tol = opt.tol;
    cfg.blocks = {opt.x_schedule, opt.b_schedule};
    cfg.scale = s;
    if (opt.observer)
      cfg.on_block_update = [&opt, s](int k, std::size_t blk, const Blocks& X) {
        opt.observer(s, k, blk, X);
      };

    const Blocks x0{image_gradient(ys), b.taps};
    MultiBlockResult r = solve_mfima(problem, modules, x0, cfg);
    int last_k = k_offset;
    for (IterateRecord& rec : r.trace.records) {
      rec.k += k_offset;
      last_k = rec.k;
      res.trace.push(std::move(rec));
    }
    k_offset = last_k;
    res.trace.stop = r.trace.stop;
    b = KernelField(ks, ks, std::move(r.x[1]));
    if (s == 0) res.gradients = std::move(r.x[0]);
  }
  res.kernel = std::move(b);
  return res;
}

}  // namespace fima
