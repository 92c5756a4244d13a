#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "segthresh/types.hpp"

namespace segthresh {

/// How images whose ground truth has no foreground enter the macro mean.
enum class EmptyTruthPolicy { Include, Exclude };

std::string_view to_string(EmptyTruthPolicy policy) noexcept;
EmptyTruthPolicy parse_policy(std::string_view text);

/// Confusion counts of one image at every grid threshold.
/// tp, fp are non-increasing and tn, fn non-decreasing along the grid.
struct PerImageCurve {
  std::string id;
  std::vector<ConfusionCounts> counts;

  /// Foreground pixels in the ground truth (tp + fn, constant along the curve).
  std::uint64_t truth_foreground() const noexcept {
    return counts.empty() ? 0 : counts.front().tp + counts.front().fn;
  }
};

/// Counts at every threshold of `grid` from a single sort of the pixel
/// probabilities (split by truth class), never rescanning pixels per
/// threshold: O(N log N + n). Identical to confusion(binarize(map, t), truth)
/// for every t. Throws ShapeError on a dimension mismatch.
PerImageCurve sweep_image(const ProbabilityMap& map, const BinaryMask& truth,
                          const ThresholdGrid& grid, std::string id = {});

/// Macro average: per-image metrics, then the unweighted mean over images,
/// summed in input order. Under Exclude, images with empty truth are dropped.
/// Throws EmptyDatasetError if no image remains, std::invalid_argument if a
/// curve does not match the grid length.
std::vector<MetricTriple> aggregate(std::span<const PerImageCurve> curves, const ThresholdGrid& grid,
                                    EmptyTruthPolicy policy);

/// Weighted sum of the three metrics with normalized weights.
double objective(const MetricTriple& triple, const ObjectiveWeights& weights) noexcept;

struct SweepResult {
  ThresholdGrid grid;
  std::vector<MetricTriple> per_threshold;
  std::vector<double> objectives;
  std::size_t optimal_index = 0;
  double optimal_threshold = 0.0;
  ObjectiveWeights weights;
  /// Unknown when the curve was replayed from stored aggregates.
  std::optional<std::size_t> images_evaluated;
  EmptyTruthPolicy empty_truth_policy = EmptyTruthPolicy::Include;
  EvaluationTag tag;

  const MetricTriple& optimal_metrics() const { return per_threshold[optimal_index]; }
};

/// Grid element with the largest objective; ties go to the lowest threshold.
/// Throws std::invalid_argument when lengths differ.
SweepResult optimize(std::span<const MetricTriple> per_threshold, const ThresholdGrid& grid,
                     const ObjectiveWeights& weights);

struct LabeledPair {
  std::string id;
  ProbabilityMap map;
  BinaryMask truth;
};

struct SweepOptions {
  EmptyTruthPolicy policy = EmptyTruthPolicy::Include;
  int workers = 1;
  EvaluationTag tag;
};

/// sweep_image over every pair using `workers` OpenMP threads. Output order
/// follows input order regardless of scheduling. A failing pair is rethrown
/// as ItemError carrying its id (the lowest-index failure wins).
std::vector<PerImageCurve> sweep_dataset(std::span<const LabeledPair> dataset,
                                         const ThresholdGrid& grid, int workers);

/// optimize(aggregate(sweep_dataset(...))). Throws EmptyDatasetError on an
/// empty dataset.
SweepResult run_sweep(std::span<const LabeledPair> dataset, const ThresholdGrid& grid,
                      const ObjectiveWeights& weights, const SweepOptions& options = {});

namespace reference {

/// Serial reference kept for testing and benchmarking: rebinarizes and
/// recounts every pixel at every threshold.
PerImageCurve sweep_image_rescan(const ProbabilityMap& map, const BinaryMask& truth,
                                 const ThresholdGrid& grid, std::string id = {});

/// Single-threaded run_sweep built on sweep_image_rescan.
SweepResult run_sweep_serial(std::span<const LabeledPair> dataset, const ThresholdGrid& grid,
                             const ObjectiveWeights& weights, const SweepOptions& options = {});

}  // namespace reference

}  // namespace segthresh
