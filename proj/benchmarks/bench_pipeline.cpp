#include <benchmark/benchmark.h>

#include "tactile/link.hpp"
#include "tactile/record_log.hpp"
#include "tactile/synth.hpp"

namespace {

void BM_RunPipeline(benchmark::State& state) {
  const auto path = tactile::link::PathProfile::host();
  const auto runs = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(tactile::link::run_pipeline(path, {}, runs, 1));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RunPipeline)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_WallclockPipeline(benchmark::State& state) {
  tactile::link::WallclockConfig cfg;
  cfg.items = 200;
  for (auto _ : state) benchmark::DoNotOptimize(tactile::link::run_wallclock_pipeline(cfg));
}
BENCHMARK(BM_WallclockPipeline)->Unit(benchmark::kMillisecond);

tactile::RecordLog pressure_log() {
  tactile::synth::ScenarioScript s;
  s.duration_s = 1.0;
  s.fingers = 1;
  s.modalities = {tactile::ModalityKind::kSurfacePressure, tactile::ModalityKind::kInertial};
  return tactile::synth::run_scenario(s);
}

void BM_EncodeLog(benchmark::State& state) {
  const auto log = pressure_log();
  for (auto _ : state) benchmark::DoNotOptimize(tactile::encode_log(log));
}
BENCHMARK(BM_EncodeLog);

void BM_DecodeLog(benchmark::State& state) {
  const auto bytes = tactile::encode_log(pressure_log());
  for (auto _ : state) benchmark::DoNotOptimize(tactile::decode_log(bytes));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(bytes.size()));
}
BENCHMARK(BM_DecodeLog);

}  // namespace
