#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "tactile/dsp.hpp"

namespace {

std::vector<double> tone(std::size_t n, double f, double fs) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = std::sin(2.0 * std::numbers::pi * f * static_cast<double>(i) / fs);
  return x;
}

void BM_PressureChainSample(benchmark::State& state) {
  tactile::dsp::PressureChain chain(1000.0);
  double x = 0.0;
  for (auto _ : state) {
    x += 1e-3;
    benchmark::DoNotOptimize(chain.process(std::sin(x)));
  }
}
BENCHMARK(BM_PressureChainSample);

void BM_MelSpectrogram(benchmark::State& state) {
  const auto x = tone(static_cast<std::size_t>(state.range(0)), 1000.0, 48000.0);
  for (auto _ : state) benchmark::DoNotOptimize(tactile::dsp::mel_spectrogram(x));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MelSpectrogram)->Arg(16000)->Arg(64000);

void BM_PeakFrequency(benchmark::State& state) {
  const auto x = tone(14400, 720.0, 48000.0);
  for (auto _ : state) benchmark::DoNotOptimize(tactile::dsp::peak_frequency(x, 48000.0));
}
BENCHMARK(BM_PeakFrequency);

}  // namespace
