#include <benchmark/benchmark.h>

#include <vector>

#include "gwlim/contour.hpp"
#include "gwlim/gwtree.hpp"
#include "gwlim/mechanism.hpp"
#include "gwlim/offspring.hpp"
#include "gwlim/random.hpp"

namespace {

using namespace gwlim;

const OffspringDistribution& super_binary() {
  static const OffspringDistribution p({0.25, 0.0, 0.75});
  return p;
}

void BM_BinomialLargeN(benchmark::State& state) {
  CounterRng rng(1);
  const std::uint64_t n = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_binomial(rng, n, 0.50005));
  }
}
BENCHMARK(BM_BinomialLargeN)->Arg(1000)->Arg(100000);

void BM_PopulationStep(benchmark::State& state) {
  CounterRng rng(2);
  const auto p = OffspringDistribution::binary(1.0 / 1600.0);
  std::uint64_t y = 1600;
  for (auto _ : state) {
    y = offspring_sum(p, y, rng);
    if (y == 0 || y > 1000000) {
      y = 1600;
    }
    benchmark::DoNotOptimize(y);
  }
}
BENCHMARK(BM_PopulationStep);

void BM_SampleTruncatedTree(benchmark::State& state) {
  CounterRng rng(3);
  const auto height = static_cast<std::uint32_t>(state.range(0));
  std::uint64_t i = 0;
  for (auto _ : state) {
    CounterRng tree_rng = rng.substream(i++);
    benchmark::DoNotOptimize(sample_truncated(super_binary(), height, tree_rng));
  }
}
BENCHMARK(BM_SampleTruncatedTree)->Arg(2)->Arg(8);

void BM_ContourOfTree(benchmark::State& state) {
  CounterRng rng(4);
  const auto tree = sample_truncated(super_binary(), 12, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(contour_of(tree));
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(tree.node_count()));
}
BENCHMARK(BM_ContourOfTree);

void BM_TruncateAbove(benchmark::State& state) {
  CounterRng rng(5);
  const auto tree = sample_truncated(super_binary(), 12, rng);
  const auto path = contour_of(tree);
  for (auto _ : state) {
    benchmark::DoNotOptimize(truncate_above(path, 6.5));
  }
}
BENCHMARK(BM_TruncateAbove);

void BM_FlowSolve(benchmark::State& state) {
  const BranchingMechanism super(-1.0, 0.5);
  double lambda = 0.01;
  for (auto _ : state) {
    benchmark::DoNotOptimize(u_solve(super, 5.0, lambda));
    lambda = lambda < 50.0 ? lambda * 1.7 : 0.01;
  }
}
BENCHMARK(BM_FlowSolve);

void BM_FellerSample(benchmark::State& state) {
  CounterRng rng(6);
  for (auto _ : state) {
    benchmark::DoNotOptimize(feller_sample(1.0, 0.5, 1.0, 0.5, rng));
  }
}
BENCHMARK(BM_FellerSample);

void BM_GenerationLawDP(benchmark::State& state) {
  const auto q = conjugate(super_binary());
  const auto cap = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(generation_size_distribution(q, 10, cap));
  }
}
BENCHMARK(BM_GenerationLawDP)->Arg(512)->Arg(4096);

}  // namespace

BENCHMARK_MAIN();
