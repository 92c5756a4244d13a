#include <random>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "oracle.hpp"
#include "segthresh/errors.hpp"
#include "segthresh/metrics.hpp"
#include "segthresh/report.hpp"
#include "segthresh/sweep.hpp"

namespace segthresh {
namespace {

std::vector<LabeledPair> random_dataset(std::uint64_t seed, std::size_t n, std::size_t w, std::size_t h) {
  std::mt19937_64 rng(seed);
  std::vector<LabeledPair> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({"img" + std::to_string(i), oracle::random_map(rng, w, h),
                   oracle::random_mask(rng, w, h, i % 4 == 0 ? 0.0 : 0.25)});
  }
  return out;
}

std::vector<MetricTriple> fixture_triples() {
  std::vector<MetricTriple> out;
  for (const auto& r : oracle::fixture_curve()) out.push_back({r.dice, r.iou, r.pixel_accuracy});
  return out;
}

ThresholdGrid fixture_grid() {
  std::vector<double> t;
  for (const auto& r : oracle::fixture_curve()) t.push_back(r.threshold);
  return ThresholdGrid(std::move(t));
}

TEST(SweepImageTest, MatchesPerThresholdRescanExactly) {
  std::mt19937_64 rng(21);
  const ThresholdGrid grid = ThresholdGrid::standard();
  for (int i = 0; i < 200; ++i) {
    const ProbabilityMap map = oracle::random_map(rng, 1 + i % 17, 1 + i % 11);
    const BinaryMask truth = oracle::random_mask(rng, map.width(), map.height(), (i % 5) / 4.0);
    const PerImageCurve fast = sweep_image(map, truth, grid);
    ASSERT_EQ(fast.counts.size(), grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
      ASSERT_EQ(fast.counts[k], oracle::counts(oracle::set_sizes(map, truth, grid[k]))) << "t=" << grid[k];
    }
    EXPECT_EQ(fast.counts, reference::sweep_image_rescan(map, truth, grid).counts);
  }
}

TEST(SweepImageTest, ExtremeValuesAndTies) {
  const ProbabilityMap map(4, 1, {0.0f, 0.25f, 0.25f, 1.0f});
  const BinaryMask truth(4, 1, {0, 1, 0, 1});
  const ThresholdGrid grid({0.0, 0.25, 0.5, 1.0});
  const PerImageCurve c = sweep_image(map, truth, grid);
  EXPECT_EQ(c.counts[0], (ConfusionCounts{2, 1, 1, 0}));
  EXPECT_EQ(c.counts[1], (ConfusionCounts{1, 0, 2, 1}));
  EXPECT_EQ(c.counts[2], (ConfusionCounts{1, 0, 2, 1}));
  EXPECT_EQ(c.counts[3], (ConfusionCounts{0, 0, 2, 2}));
  EXPECT_EQ(c.truth_foreground(), 2u);
}

TEST(SweepImageTest, FloatValueIsComparedUnrounded) {
  // 0.3f is slightly above 0.3, so it is foreground at t = 0.3
  const ProbabilityMap map(1, 1, {0.3f});
  const BinaryMask truth(1, 1, {1});
  EXPECT_EQ(sweep_image(map, truth, ThresholdGrid({0.3})).counts[0], (ConfusionCounts{1, 0, 0, 0}));
  EXPECT_EQ(confusion(binarize(map, 0.3), truth), (ConfusionCounts{1, 0, 0, 0}));
}

TEST(SweepImageTest, UniformHalfMap) {
  const ProbabilityMap map(3, 3, std::vector<float>(9, 0.5f));
  const BinaryMask truth(3, 3, {1, 1, 0, 0, 0, 0, 0, 0, 1});
  const PerImageCurve c = sweep_image(map, truth, ThresholdGrid({0.4, 0.6}));
  EXPECT_EQ(c.counts[0], (ConfusionCounts{3, 6, 0, 0}));
  EXPECT_EQ(c.counts[1], (ConfusionCounts{0, 0, 6, 3}));
}

TEST(SweepImageTest, NegativeZeroSortsWithZero) {
  const ProbabilityMap map(3, 1, {-0.0f, 0.5f, 0.0f});
  const BinaryMask truth(3, 1, {1, 1, 0});
  const ThresholdGrid grid({0.0, 0.4});
  EXPECT_EQ(sweep_image(map, truth, grid).counts, reference::sweep_image_rescan(map, truth, grid).counts);
}

TEST(SweepImageTest, CountsAreMonotoneAlongGrid) {
  std::mt19937_64 rng(22);
  const ThresholdGrid grid = ThresholdGrid::standard();
  const PerImageCurve c = sweep_image(oracle::random_map(rng, 20, 20), oracle::random_mask(rng, 20, 20), grid);
  for (std::size_t k = 1; k < grid.size(); ++k) {
    EXPECT_LE(c.counts[k].tp, c.counts[k - 1].tp);
    EXPECT_LE(c.counts[k].fp, c.counts[k - 1].fp);
    EXPECT_GE(c.counts[k].tn, c.counts[k - 1].tn);
    EXPECT_GE(c.counts[k].fn, c.counts[k - 1].fn);
  }
}

TEST(SweepImageTest, ShapeMismatch) {
  const ProbabilityMap map(2, 2, std::vector<float>(4, 0.5f));
  EXPECT_THROW(sweep_image(map, BinaryMask::filled(2, 3, false), ThresholdGrid::standard()), ShapeError);
}

TEST(AggregateTest, MacroMeanOverImages) {
  const ThresholdGrid grid({0.5});
  // image a: perfect; image b: total miss.
  const PerImageCurve a{"a", {{4, 0, 0, 0}}};
  const PerImageCurve b{"b", {{0, 0, 0, 4}}};
  const std::vector<PerImageCurve> curves{a, b};
  const auto m = aggregate(curves, grid, EmptyTruthPolicy::Include);
  EXPECT_EQ(m[0].dice, 0.5);
  EXPECT_EQ(m[0].iou, 0.5);
  EXPECT_EQ(m[0].pixel_accuracy, 0.5);
}

TEST(AggregateTest, EmptyTruthPolicy) {
  const ThresholdGrid grid({0.5});
  const PerImageCurve hit{"hit", {{1, 1, 1, 1}}};
  const PerImageCurve empty{"empty", {{0, 0, 4, 0}}};
  const std::vector<PerImageCurve> curves{hit, empty};
  EXPECT_EQ(aggregate(curves, grid, EmptyTruthPolicy::Include)[0].dice, 0.75);
  EXPECT_EQ(aggregate(curves, grid, EmptyTruthPolicy::Exclude)[0].dice, 0.5);
  const std::vector<PerImageCurve> only_empty{empty};
  EXPECT_THROW(aggregate(only_empty, grid, EmptyTruthPolicy::Exclude), EmptyDatasetError);
  EXPECT_THROW(aggregate(std::vector<PerImageCurve>{}, grid, EmptyTruthPolicy::Include), EmptyDatasetError);
}

TEST(AggregateTest, LengthMismatch) {
  const PerImageCurve a{"a", {{1, 0, 0, 0}, {1, 0, 0, 0}}};
  const std::vector<PerImageCurve> curves{a};
  EXPECT_THROW(aggregate(curves, ThresholdGrid({0.5}), EmptyTruthPolicy::Include), std::invalid_argument);
}

TEST(OptimizeTest, ReplayOfStoredCurve) {
  const auto triples = fixture_triples();
  const ThresholdGrid grid = fixture_grid();
  const SweepResult dice_only = optimize(triples, grid, ObjectiveWeights::dice_only());
  EXPECT_EQ(dice_only.optimal_threshold, 0.14);
  EXPECT_EQ(dice_only.optimal_metrics().dice, 0.7812);
  EXPECT_EQ(dice_only.optimal_metrics().iou, 0.7015);
  EXPECT_EQ(dice_only.optimal_metrics().pixel_accuracy, 0.9576);

  const SweepResult equal = optimize(triples, grid, ObjectiveWeights::equal());
  EXPECT_EQ(equal.optimal_threshold, 0.15);
  EXPECT_NEAR(equal.objectives[equal.optimal_index], (0.7803 + 0.7024 + 0.9593) / 3.0, 1e-12);
  EXPECT_FALSE(equal.images_evaluated.has_value());
}

TEST(OptimizeTest, StoredCurveColumnMeans) {
  double d = 0, i = 0, p = 0;
  for (const auto& t : fixture_triples()) {
    d += t.dice;
    i += t.iou;
    p += t.pixel_accuracy;
  }
  EXPECT_EQ(fixed6(d / 5), "0.780100");
  EXPECT_EQ(fixed6(i / 5), "0.699600");
  EXPECT_NEAR(p / 5, 0.9552, 2e-4);
}

TEST(OptimizeTest, TiesGoToLowestThreshold) {
  const std::vector<MetricTriple> flat(4, MetricTriple{0.5, 0.4, 0.9});
  const SweepResult r = optimize(flat, ThresholdGrid({0.1, 0.2, 0.3, 0.4}), ObjectiveWeights::equal());
  EXPECT_EQ(r.optimal_index, 0u);
  EXPECT_EQ(r.optimal_threshold, 0.1);
}

TEST(OptimizeTest, LengthMismatch) {
  const std::vector<MetricTriple> one(1);
  EXPECT_THROW(optimize(one, ThresholdGrid({0.1, 0.2}), ObjectiveWeights::equal()), std::invalid_argument);
}

TEST(OptimizeTest, ArgmaxInvariantUnderWeightScaling) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const ThresholdGrid grid = ThresholdGrid::standard();
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<MetricTriple> curve(grid.size());
    for (auto& t : curve) t = {u(rng), u(rng), u(rng)};
    const double a = u(rng) + 0.01, b = u(rng), c = u(rng);
    const SweepResult r1 = optimize(curve, grid, ObjectiveWeights(a, b, c));
    const SweepResult r2 = optimize(curve, grid, ObjectiveWeights(7 * a, 7 * b, 7 * c));
    EXPECT_EQ(r1.optimal_index, r2.optimal_index);
  }
}

TEST(RunSweepTest, ParallelMatchesSerialReference) {
  const auto data = random_dataset(24, 40, 24, 18);
  const ThresholdGrid grid = ThresholdGrid::standard();
  const SweepResult serial = reference::run_sweep_serial(data, grid, ObjectiveWeights::equal());
  for (int workers : {1, 2, 8}) {
    SweepOptions opt;
    opt.workers = workers;
    const SweepResult par = run_sweep(data, grid, ObjectiveWeights::equal(), opt);
    EXPECT_EQ(par.per_threshold, serial.per_threshold);
    EXPECT_EQ(par.objectives, serial.objectives);
    EXPECT_EQ(par.optimal_index, serial.optimal_index);
    EXPECT_EQ(par.images_evaluated, std::optional<std::size_t>(40));
  }
}

TEST(RunSweepTest, PerImageMetricsMatchOracle) {
  const auto data = random_dataset(25, 12, 10, 10);
  const ThresholdGrid grid({0.1, 0.5, 0.9});
  const SweepResult r = run_sweep(data, grid, ObjectiveWeights::equal());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    double d = 0, i = 0, p = 0;
    for (const auto& pair : data) {
      const auto s = oracle::set_sizes(pair.map, pair.truth, grid[k]);
      d += oracle::dice(s);
      i += oracle::iou(s);
      p += oracle::pixel_accuracy(s);
    }
    EXPECT_NEAR(r.per_threshold[k].dice, d / 12, 1e-15);
    EXPECT_NEAR(r.per_threshold[k].iou, i / 12, 1e-15);
    EXPECT_NEAR(r.per_threshold[k].pixel_accuracy, p / 12, 1e-15);
  }
}

TEST(RunSweepTest, EmptyDataset) {
  EXPECT_THROW(run_sweep(std::vector<LabeledPair>{}, ThresholdGrid::standard(), ObjectiveWeights::equal()),
               EmptyDatasetError);
}

TEST(RunSweepTest, FailingPairNamesItsId) {
  auto data = random_dataset(26, 6, 8, 8);
  data[3].truth = BinaryMask::filled(4, 4, false);
  data[5].truth = BinaryMask::filled(4, 4, false);
  try {
    sweep_dataset(data, ThresholdGrid::standard(), 4);
    FAIL() << "expected ItemError";
  } catch (const ItemError& e) {
    EXPECT_EQ(e.id(), "img3");
  }
}

TEST(PolicyTest, Parse) {
  EXPECT_EQ(parse_policy("include"), EmptyTruthPolicy::Include);
  EXPECT_EQ(parse_policy("exclude"), EmptyTruthPolicy::Exclude);
  EXPECT_THROW(parse_policy("skip"), std::invalid_argument);
}

}  // namespace
}  // namespace segthresh
