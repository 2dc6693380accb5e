// Serial reference vs OpenMP batch simulation on a generated instance.
#include <benchmark/benchmark.h>

#include "ballrl/generator.hpp"
#include "ballrl/simulator.hpp"

namespace {

const ballrl::LinearQStarMdp& instance() {
  static const ballrl::LinearQStarMdp mdp = [] {
    ballrl::GeneratorConfig cfg;
    cfg.dim = 4;
    cfg.horizon = 3;
    cfg.states_per_step = {3, 4, 4};
    cfg.kernel_family = ballrl::KernelKind::SoftmaxAffine;
    cfg.radius_range = {0.05, 0.12};
    cfg.noise = ballrl::BoundedUniformNoise{0.05};
    cfg.seed = 1;
    return ballrl::generate_instance(cfg);
  }();
  return mdp;
}

const ballrl::Policy& policy() {
  static const ballrl::Policy p = ballrl::Policy::greedy(instance().theta_star, ballrl::GreedyDomain::ActionSet);
  return p;
}

void BM_BatchSerial(benchmark::State& state) {
  const auto m = std::size_t(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(ballrl::batch_serial(instance(), policy(), m, ballrl::RngStream(7)));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_BatchParallel(benchmark::State& state) {
  const auto m = std::size_t(state.range(0));
  const int threads = int(state.range(1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(ballrl::batch(instance(), policy(), m, ballrl::RngStream(7), threads));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_BatchSerial)->Arg(1 << 12)->Arg(1 << 16)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BatchParallel)
    ->ArgsProduct({{1 << 12, 1 << 16}, {1, 2, 4, 8}})
    ->ArgNames({"m", "threads"})
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();

BENCHMARK_MAIN();
