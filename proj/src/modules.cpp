#include "fima/modules.hpp"

#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <memory>
#include <mutex>
#include <thread>

#include "fima/image.hpp"

extern char** environ;

namespace fima {
namespace fs = std::filesystem;

ModulePair module_identity() {
  const VecMap id = [](ConstView x) { return Vec(x.begin(), x.end()); };
  return ModulePair{id, id, "identity"};
}

ModulePair module_pg_step(const CompositeProblem& problem, double gamma) {
  if (!(gamma > 0.0)) throw InvalidArgument("module_pg_step: gamma must be positive");
  auto p = std::make_shared<const CompositeProblem>(problem);
  ModulePair m;
  m.label = "pg";
  m.a_f = [p, gamma](ConstView x) { return axpy(x, -gamma, p->smooth.gradient(x)); };
  m.a_g = [p, gamma](ConstView v) { return p->nonsmooth.prox(v, gamma); };
  return m;
}

namespace {

void check_shape(ConstView image, kernels::Dims dims, const std::string& who) {
  if (image.size() != dims.size() || dims.size() == 0)
    throw InvalidArgument(who + ": input of size " + std::to_string(image.size()) +
                          " does not match " + std::to_string(dims.height) + "x" +
                          std::to_string(dims.width));
}

}  // namespace

Denoiser module_tv_denoise(double weight, int inner_iters) {
  if (!(weight > 0.0)) throw InvalidArgument("tv module: weight must be positive");
  if (inner_iters < 1) throw InvalidArgument("tv module: inner_iters must be positive");
  Denoiser d;
  d.label = "tv";
  d.apply = [weight, inner_iters](ConstView image, kernels::Dims dims) {
    check_shape(image, dims, "tv module");
    Vec out(image.size());
    kernels::parallel::tv_chambolle(image, out, dims, weight, inner_iters);
    return out;
  };
  return d;
}

Denoiser module_recursive_filter(double sigma) {
  if (!(sigma > 0.0)) throw InvalidArgument("recursive filter: sigma must be positive");
  const double decay = std::exp(-std::sqrt(2.0) / sigma);
  Denoiser d;
  d.label = "rf";
  d.apply = [decay](ConstView image, kernels::Dims dims) {
    check_shape(image, dims, "recursive filter");
    Vec out(image.size());
    kernels::parallel::recursive_filter(image, out, dims, decay);
    return out;
  };
  return d;
}

// ---- external process ------------------------------------------------------------

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    std::string pattern = (fs::temp_directory_path() / "fima-ext-XXXXXX").string();
    if (!::mkdtemp(pattern.data())) throw ModuleUnavailable("external module: mkdtemp failed");
    path = pattern;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

std::string substitute(std::string text, const std::string& key, const std::string& value) {
  for (std::size_t pos = text.find(key); pos != std::string::npos;
       pos = text.find(key, pos + value.size()))
    text.replace(pos, key.size(), value);
  return text;
}

/// Runs `/bin/sh -c command`; returns the exit status or throws
/// ModuleUnavailable on spawn failure, signal death or timeout.
int run_shell(const std::string& command, std::chrono::milliseconds timeout) {
  pid_t pid = 0;
  std::string sh = "/bin/sh", flag = "-c", cmd = command;
  char* argv[] = {sh.data(), flag.data(), cmd.data(), nullptr};
  if (::posix_spawn(&pid, "/bin/sh", nullptr, nullptr, argv, environ) != 0)
    throw ModuleUnavailable("external module: cannot spawn shell");
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  int status = 0;
  for (;;) {
    const pid_t r = ::waitpid(pid, &status, WNOHANG);
    if (r == pid) break;
    if (r < 0) throw ModuleUnavailable("external module: waitpid failed");
    if (std::chrono::steady_clock::now() >= deadline) {
      ::kill(pid, SIGKILL);
      ::waitpid(pid, &status, 0);
      throw ModuleUnavailable("external module: timed out after " +
                              std::to_string(timeout.count()) + " ms");
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }
  if (!WIFEXITED(status)) throw ModuleUnavailable("external module: killed by signal");
  return WEXITSTATUS(status);
}

}  // namespace

Denoiser module_external_denoiser(std::string command_template, std::chrono::milliseconds timeout) {
  if (command_template.find("{in}") == std::string::npos ||
      command_template.find("{out}") == std::string::npos)
    throw InvalidArgument("external module: command template needs {in} and {out} placeholders");
  if (timeout.count() <= 0) throw InvalidArgument("external module: timeout must be positive");
  auto lock = std::make_shared<std::mutex>();
  Denoiser d;
  d.label = "external";
  d.apply = [tmpl = std::move(command_template), timeout, lock](ConstView image,
                                                               kernels::Dims dims) {
    check_shape(image, dims, "external module");
    std::lock_guard guard(*lock);
    TempDir dir;
    const fs::path in = dir.path / "in.pgm", out = dir.path / "out.pgm";
    write_pgm(ImageField(dims.height, dims.width, Vec(image.begin(), image.end())), in);
    const std::string cmd = substitute(substitute(tmpl, "{in}", in.string()), "{out}", out.string());
    const int code = run_shell(cmd, timeout);
    if (code != 0)
      throw ModuleUnavailable("external module: command exited with status " + std::to_string(code));
    ImageField result;
    try {
      result = read_pgm(out);
    } catch (const InputError& e) {
      throw ModuleUnavailable(std::string("external module: ") + e.what());
    }
    if (result.height != dims.height || result.width != dims.width)
      throw ModuleUnavailable("external module: output has the wrong shape");
    return result.pixels;
  };
  return d;
}

VecMap as_map(Denoiser denoiser, kernels::Dims dims) {
  return [d = std::move(denoiser), dims](ConstView x) { return d.apply(x, dims); };
}

double total_variation(ConstView image, kernels::Dims dims) {
  check_shape(image, dims, "total_variation");
  double tv = 0.0;
  for (std::size_t i = 0; i < dims.height; ++i)
    for (std::size_t j = 0; j < dims.width; ++j) {
      const std::size_t idx = i * dims.width + j;
      const double gx = j + 1 < dims.width ? image[idx + 1] - image[idx] : 0.0;
      const double gy = i + 1 < dims.height ? image[idx + dims.width] - image[idx] : 0.0;
      tv += std::sqrt(gx * gx + gy * gy);
    }
  return tv;
}

}  // namespace fima
