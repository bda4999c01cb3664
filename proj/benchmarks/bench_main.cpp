#include "beamlearn/learn.hpp"
#include "beamlearn/mimo.hpp"
#include "beamlearn/objective.hpp"

#include <benchmark/benchmark.h>

using namespace beamlearn;

namespace {

UnitaryTransform random_start(std::size_t b) {
  LearnConfig cfg;
  cfg.init = InitKind::RandomUnitary;
  cfg.seed = 7;
  return initial_transform(cfg, b);
}

void BM_ExactObjective(benchmark::State& state) {
  const auto b = static_cast<std::size_t>(state.range(0));
  const auto ev = ObjectiveEvaluator::exact_uniform(b);
  const auto a = random_start(b);
  for (auto _ : state) benchmark::DoNotOptimize(ev.objective(a));
}
BENCHMARK(BM_ExactObjective)->Arg(16)->Arg(64)->Arg(256);

void BM_ExactGradient(benchmark::State& state) {
  const auto b = static_cast<std::size_t>(state.range(0));
  const auto ev = ObjectiveEvaluator::exact_uniform(b);
  const auto a = random_start(b);
  for (auto _ : state) benchmark::DoNotOptimize(ev.gradient(a));
}
BENCHMARK(BM_ExactGradient)->Arg(16)->Arg(64)->Arg(256);

void BM_EmpiricalGradient(benchmark::State& state) {
  const auto b = static_cast<std::size_t>(state.range(0));
  const auto ev = ObjectiveEvaluator::sampled(MultiPath::unit_energy(b, 3), 4000, 1);
  const auto a = random_start(b);
  for (auto _ : state) benchmark::DoNotOptimize(ev.gradient(a));
}
BENCHMARK(BM_EmpiricalGradient)->Arg(16)->Arg(64);

void BM_MspStep(benchmark::State& state) {
  const auto b = static_cast<std::size_t>(state.range(0));
  const auto ev = ObjectiveEvaluator::sampled(MultiPath::unit_energy(b, 3), 4000, 1);
  const auto a = random_start(b);
  for (auto _ : state) benchmark::DoNotOptimize(msp_step(ev, a));
}
BENCHMARK(BM_MspStep)->Arg(16)->Arg(64);

// one CA sweep over all pairs
void BM_CaSweep(benchmark::State& state) {
  const auto b = static_cast<std::size_t>(state.range(0));
  const auto ev = ObjectiveEvaluator::sampled(MultiPath::unit_energy(b, 3), 4000, 1);
  LearnConfig cfg;
  cfg.algorithm = Algorithm::Ca;
  cfg.init = InitKind::RandomUnitary;
  cfg.seed = 7;
  cfg.max_iterations = 1;
  for (auto _ : state) benchmark::DoNotOptimize(learn_ca(ev, cfg));
}
BENCHMARK(BM_CaSweep)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_SimulateBer(benchmark::State& state) {
  SimConfig cfg;
  cfg.antennas = 64;
  cfg.users = 8;
  cfg.snr_grid_db = {10.0};
  cfg.trials_per_snr = 200;
  cfg.detector.kind = static_cast<Detector::Kind>(state.range(0));
  if (cfg.detector.kind == Detector::Kind::BeamspaceLe) cfg.detector.density = 0.25;
  cfg.transform = dft_matrix(64);
  cfg.transform_name = "dft";
  const ChannelModel model = MultiPath::unit_energy(64, 3);
  for (auto _ : state) benchmark::DoNotOptimize(simulate_ber(cfg, model));
  state.SetItemsProcessed(state.iterations() * 200);
}
BENCHMARK(BM_SimulateBer)
    ->Arg(static_cast<int>(Detector::Kind::AntennaLmmse))
    ->Arg(static_cast<int>(Detector::Kind::BeamspaceLe))
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
