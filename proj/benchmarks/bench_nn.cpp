#include <benchmark/benchmark.h>

#include "tactile/nn.hpp"

namespace {

using tactile::nn::MlpModel;
using tactile::nn::MlpSpec;

void BM_MlpForward(benchmark::State& state) {
  const int width = static_cast<int>(state.range(0));
  MlpSpec spec;
  spec.layer_sizes = {width, width, width, 3};
  const auto model = MlpModel::random(spec, 1);
  const tactile::nn::Vector x = tactile::nn::Vector::Constant(width, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(model.forward(x));
}
BENCHMARK(BM_MlpForward)->Arg(64)->Arg(256);

void BM_TrainEpochXor(benchmark::State& state) {
  tactile::nn::Dataset d;
  d.x.resize(2, 4);
  d.x << 0, 0, 1, 1, 0, 1, 0, 1;
  d.labels = {0, 1, 1, 0};
  MlpSpec spec;
  spec.layer_sizes = {2, 8, 2};
  tactile::nn::TrainConfig cfg;
  cfg.max_epochs = 1;
  for (auto _ : state) benchmark::DoNotOptimize(tactile::nn::train(d, spec, cfg));
}
BENCHMARK(BM_TrainEpochXor);

}  // namespace
