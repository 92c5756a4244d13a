#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "oracle.hpp"
#include "segthresh/sweep.hpp"

namespace {

using namespace segthresh;

std::vector<LabeledPair> make_data(std::size_t n, std::size_t side) {
  std::mt19937_64 rng(17);
  std::vector<LabeledPair> data;
  for (std::size_t i = 0; i < n; ++i) {
    data.push_back({std::to_string(i), oracle::random_map(rng, side, side), oracle::random_mask(rng, side, side, 0.3)});
  }
  return data;
}

void BM_SweepImageSorted(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  const auto data = make_data(1, side);
  const ThresholdGrid grid = ThresholdGrid::standard();
  for (auto _ : state) benchmark::DoNotOptimize(sweep_image(data[0].map, data[0].truth, grid));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(side * side));
}

void BM_SweepImageRescan(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  const auto data = make_data(1, side);
  const ThresholdGrid grid = ThresholdGrid::standard();
  for (auto _ : state) benchmark::DoNotOptimize(reference::sweep_image_rescan(data[0].map, data[0].truth, grid));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(side * side));
}

void BM_RunSweepSerialReference(benchmark::State& state) {
  const auto data = make_data(64, 128);
  const ThresholdGrid grid = ThresholdGrid::standard();
  for (auto _ : state) benchmark::DoNotOptimize(reference::run_sweep_serial(data, grid, ObjectiveWeights::equal()));
}

void BM_RunSweepParallel(benchmark::State& state) {
  const auto data = make_data(64, 128);
  const ThresholdGrid grid = ThresholdGrid::standard();
  SweepOptions opt;
  opt.workers = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_sweep(data, grid, ObjectiveWeights::equal(), opt));
}

}  // namespace

BENCHMARK(BM_SweepImageSorted)->Arg(64)->Arg(256);
BENCHMARK(BM_SweepImageRescan)->Arg(64)->Arg(256);
BENCHMARK(BM_RunSweepSerialReference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RunSweepParallel)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
