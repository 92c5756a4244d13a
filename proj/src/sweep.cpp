#include "segthresh/sweep.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <stdexcept>

#include "segthresh/errors.hpp"
#include "segthresh/metrics.hpp"
#include "parallel.hpp"

namespace segthresh {

std::string_view to_string(EmptyTruthPolicy policy) noexcept {
  return policy == EmptyTruthPolicy::Include ? "include" : "exclude";
}

EmptyTruthPolicy parse_policy(std::string_view text) {
  if (text == "include") return EmptyTruthPolicy::Include;
  if (text == "exclude") return EmptyTruthPolicy::Exclude;
  throw std::invalid_argument("unknown empty-truth policy '" + std::string(text) + "'");
}

namespace {

void check_shape(const ProbabilityMap& map, const BinaryMask& truth) {
  if (map.width() != truth.width() || map.height() != truth.height()) {
    throw ShapeError("probability map is " + std::to_string(map.width()) + "x" +
                     std::to_string(map.height()) + " but truth is " +
                     std::to_string(truth.width()) + "x" + std::to_string(truth.height()));
  }
}

// Probabilities are non-negative, so their IEEE-754 bit patterns order the
// same way as the values once -0.0 is folded into +0.0.
std::uint32_t order_key(float p) noexcept {
  const auto bits = std::bit_cast<std::uint32_t>(p);
  return bits == 0x80000000u ? 0u : bits;
}

// LSD radix sort, 11-bit digits; `scratch` is resized as needed.
void radix_sort(std::vector<std::uint32_t>& keys, std::vector<std::uint32_t>& scratch) {
  constexpr int kBits = 11;
  constexpr std::uint32_t kMask = (1u << kBits) - 1;
  scratch.resize(keys.size());
  for (int shift = 0; shift < 32; shift += kBits) {
    std::array<std::uint32_t, (1u << kBits) + 1> offsets{};
    for (const auto k : keys) ++offsets[((k >> shift) & kMask) + 1];
    for (std::size_t d = 1; d < offsets.size(); ++d) offsets[d] += offsets[d - 1];
    for (const auto k : keys) scratch[offsets[(k >> shift) & kMask]++] = k;
    keys.swap(scratch);
  }
}

}  // namespace

PerImageCurve sweep_image(const ProbabilityMap& map, const BinaryMask& truth,
                          const ThresholdGrid& grid, std::string id) {
  check_shape(map, truth);
  const auto probs = map.values();
  const auto labels = truth.values();

  std::vector<std::uint32_t> fg;
  std::vector<std::uint32_t> bg;
  const std::size_t n_fg = truth.foreground_count();
  fg.reserve(n_fg);
  bg.reserve(probs.size() - n_fg);
  for (std::size_t i = 0; i < probs.size(); ++i) {
    (labels[i] ? fg : bg).push_back(order_key(probs[i]));
  }
  std::vector<std::uint32_t> scratch;
  radix_sort(fg, scratch);
  radix_sort(bg, scratch);

  // at_or_below_* is the running count of pixels with p <= t; a pixel is
  // predicted foreground iff p > t, so predicted counts are the remainders.
  const auto value = [](std::uint32_t key) { return static_cast<double>(std::bit_cast<float>(key)); };
  PerImageCurve curve{std::move(id), {}};
  curve.counts.reserve(grid.size());
  std::size_t at_or_below_fg = 0;
  std::size_t at_or_below_bg = 0;
  for (const double t : grid.values()) {
    while (at_or_below_fg < fg.size() && value(fg[at_or_below_fg]) <= t) ++at_or_below_fg;
    while (at_or_below_bg < bg.size() && value(bg[at_or_below_bg]) <= t) ++at_or_below_bg;
    ConfusionCounts c;
    c.tp = fg.size() - at_or_below_fg;
    c.fn = at_or_below_fg;
    c.fp = bg.size() - at_or_below_bg;
    c.tn = at_or_below_bg;
    curve.counts.push_back(c);
  }
  return curve;
}

std::vector<MetricTriple> aggregate(std::span<const PerImageCurve> curves, const ThresholdGrid& grid,
                                    EmptyTruthPolicy policy) {
  if (curves.empty()) {
    throw EmptyDatasetError("aggregate: no images to average");
  }
  std::vector<MetricTriple> sums(grid.size());
  std::size_t used = 0;
  for (const auto& curve : curves) {
    if (curve.counts.size() != grid.size()) {
      throw std::invalid_argument("aggregate: curve '" + curve.id + "' has " +
                                  std::to_string(curve.counts.size()) + " points, grid has " +
                                  std::to_string(grid.size()));
    }
    if (policy == EmptyTruthPolicy::Exclude && curve.truth_foreground() == 0) continue;
    ++used;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const MetricTriple m = metrics_from(curve.counts[i]);
      sums[i].dice += m.dice;
      sums[i].iou += m.iou;
      sums[i].pixel_accuracy += m.pixel_accuracy;
    }
  }
  if (used == 0) {
    throw EmptyDatasetError("aggregate: every image has empty ground truth under policy 'exclude'");
  }
  const double n = static_cast<double>(used);
  for (auto& s : sums) {
    s.dice /= n;
    s.iou /= n;
    s.pixel_accuracy /= n;
  }
  return sums;
}

double objective(const MetricTriple& t, const ObjectiveWeights& w) noexcept {
  return w.dice() * t.dice + w.iou() * t.iou + w.pixel_accuracy() * t.pixel_accuracy;
}

SweepResult optimize(std::span<const MetricTriple> per_threshold, const ThresholdGrid& grid,
                     const ObjectiveWeights& weights) {
  if (per_threshold.size() != grid.size()) {
    throw std::invalid_argument("optimize: " + std::to_string(per_threshold.size()) +
                                " metric triples for a grid of " + std::to_string(grid.size()));
  }
  SweepResult result{grid,
                     std::vector<MetricTriple>(per_threshold.begin(), per_threshold.end()),
                     {},
                     0,
                     0.0,
                     weights,
                     std::nullopt,
                     EmptyTruthPolicy::Include,
                     {}};
  result.objectives.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double value = objective(per_threshold[i], weights);
    result.objectives.push_back(value);
    // Strict comparison keeps the lowest threshold on ties.
    if (value > result.objectives[result.optimal_index]) result.optimal_index = i;
  }
  result.optimal_threshold = grid[result.optimal_index];
  return result;
}

std::vector<PerImageCurve> sweep_dataset(std::span<const LabeledPair> dataset,
                                         const ThresholdGrid& grid, int workers) {
  std::vector<PerImageCurve> curves(dataset.size());
  detail::parallel_items(
      dataset.size(), workers,
      [&](std::size_t i) {
        const auto& item = dataset[i];
        curves[i] = sweep_image(item.map, item.truth, grid, item.id);
      },
      [&](std::size_t i) { return dataset[i].id; });
  return curves;
}

SweepResult run_sweep(std::span<const LabeledPair> dataset, const ThresholdGrid& grid,
                      const ObjectiveWeights& weights, const SweepOptions& options) {
  if (dataset.empty()) {
    throw EmptyDatasetError("run_sweep: dataset is empty");
  }
  const auto curves = sweep_dataset(dataset, grid, options.workers);
  const auto per_threshold = aggregate(curves, grid, options.policy);
  SweepResult result = optimize(per_threshold, grid, weights);
  result.empty_truth_policy = options.policy;
  result.tag = options.tag;
  result.images_evaluated =
      options.policy == EmptyTruthPolicy::Include
          ? curves.size()
          : static_cast<std::size_t>(std::count_if(curves.begin(), curves.end(),
                                                   [](const PerImageCurve& c) {
                                                     return c.truth_foreground() > 0;
                                                   }));
  return result;
}

namespace reference {

PerImageCurve sweep_image_rescan(const ProbabilityMap& map, const BinaryMask& truth,
                                 const ThresholdGrid& grid, std::string id) {
  check_shape(map, truth);
  PerImageCurve curve{std::move(id), {}};
  curve.counts.reserve(grid.size());
  for (const double t : grid.values()) {
    curve.counts.push_back(confusion(binarize(map, t), truth));
  }
  return curve;
}

SweepResult run_sweep_serial(std::span<const LabeledPair> dataset, const ThresholdGrid& grid,
                             const ObjectiveWeights& weights, const SweepOptions& options) {
  if (dataset.empty()) {
    throw EmptyDatasetError("run_sweep: dataset is empty");
  }
  std::vector<PerImageCurve> curves;
  curves.reserve(dataset.size());
  for (const auto& item : dataset) {
    try {
      curves.push_back(sweep_image_rescan(item.map, item.truth, grid, item.id));
    } catch (const std::exception& e) {
      throw ItemError(item.id, e.what());
    }
  }
  const auto per_threshold = aggregate(curves, grid, options.policy);
  SweepResult result = optimize(per_threshold, grid, weights);
  result.empty_truth_policy = options.policy;
  result.tag = options.tag;
  std::size_t used = 0;
  for (const auto& c : curves) {
    if (options.policy == EmptyTruthPolicy::Include || c.truth_foreground() > 0) ++used;
  }
  result.images_evaluated = used;
  return result;
}

}  // namespace reference

}  // namespace segthresh
