// Serial reference vs OpenMP kernels. Argument is the image side length.

#include <benchmark/benchmark.h>

#include "fima/deconv.hpp"
#include "fima/kernels.hpp"
#include "fima/random.hpp"

namespace K = fima::kernels;

namespace {

fima::Vec noise(std::size_t n) {
  fima::CounterRng rng(42);
  fima::Vec v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = rng.uniform(i);
  return v;
}

template <auto Fn>
void threshold(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0) * state.range(0));
  const fima::Vec in = noise(n);
  fima::Vec out(n);
  for (auto _ : state) {
    Fn(in, out, 0.3);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n));
}

template <auto Fn>
void tv(benchmark::State& state) {
  const std::size_t s = static_cast<std::size_t>(state.range(0));
  const fima::Vec in = noise(s * s);
  fima::Vec out(s * s);
  for (auto _ : state) {
    Fn(in, out, {s, s}, 0.05, 20);
    benchmark::DoNotOptimize(out.data());
  }
}

template <auto Fn>
void rf(benchmark::State& state) {
  const std::size_t s = static_cast<std::size_t>(state.range(0));
  const fima::Vec in = noise(s * s);
  fima::Vec out(s * s);
  for (auto _ : state) {
    Fn(in, out, {s, s}, 0.7);
    benchmark::DoNotOptimize(out.data());
  }
}

template <auto Fn>
void conv(benchmark::State& state) {
  const std::size_t s = static_cast<std::size_t>(state.range(0));
  const fima::Vec in = noise(s * s);
  const fima::Vec ker = fima::KernelField::gaussian(9, 1.5).taps;
  fima::Vec out(s * s);
  for (auto _ : state) {
    Fn(in, {s, s}, ker, {9, 9}, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void fft_conv(benchmark::State& state) {
  const std::size_t s = static_cast<std::size_t>(state.range(0));
  const fima::ImageField img(s, s, noise(s * s));
  const fima::KernelField ker = fima::KernelField::gaussian(9, 1.5);
  for (auto _ : state) benchmark::DoNotOptimize(fima::convolve_circular(img, ker).pixels.data());
}

}  // namespace

BENCHMARK(threshold<K::serial::soft_threshold>)->Name("soft_threshold/serial")->Arg(256)->Arg(1024);
BENCHMARK(threshold<K::parallel::soft_threshold>)->Name("soft_threshold/parallel")->Arg(256)->Arg(1024);
BENCHMARK(threshold<K::serial::half_threshold>)->Name("half_threshold/serial")->Arg(256)->Arg(1024);
BENCHMARK(threshold<K::parallel::half_threshold>)->Name("half_threshold/parallel")->Arg(256)->Arg(1024);
BENCHMARK(tv<K::serial::tv_chambolle>)->Name("tv_chambolle/serial")->Arg(128)->Arg(256);
BENCHMARK(tv<K::parallel::tv_chambolle>)->Name("tv_chambolle/parallel")->Arg(128)->Arg(256);
BENCHMARK(rf<K::serial::recursive_filter>)->Name("recursive_filter/serial")->Arg(256)->Arg(512);
BENCHMARK(rf<K::parallel::recursive_filter>)->Name("recursive_filter/parallel")->Arg(256)->Arg(512);
BENCHMARK(conv<K::serial::convolve_direct>)->Name("convolve_direct/serial")->Arg(128)->Arg(256);
BENCHMARK(conv<K::parallel::convolve_direct>)->Name("convolve_direct/parallel")->Arg(128)->Arg(256);
BENCHMARK(fft_conv)->Name("convolve_fft")->Arg(128)->Arg(256);

BENCHMARK_MAIN();
