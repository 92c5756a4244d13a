#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "segthresh/sweep.hpp"
#include "segthresh/types.hpp"

namespace segthresh {

/// Header of every curve CSV.
inline constexpr const char* kCurveCsvHeader = "threshold,dice,iou,pixel_accuracy,objective";

/// Fixed 6-decimal text, the only float format used in reports.
std::string fixed6(double value);
/// Value rounded to 6 decimals, for JSON numbers.
double round6(double value);

/// One row per grid point, sorted by threshold.
std::string format_curve_csv(const SweepResult& result);
/// Keys: threshold, optimal_threshold, mean_dice, mean_iou,
/// mean_pixel_accuracy, objective, weights, n_images, policy, split, curve.
std::string format_sweep_json(const SweepResult& result);

/// Aggregated per-threshold metrics from a curve CSV. The header must start
/// with threshold,dice,iou,pixel_accuracy; a trailing objective column is
/// ignored. Rows are sorted by threshold on load.
struct StoredCurve {
  ThresholdGrid grid;
  std::vector<MetricTriple> per_threshold;
};

StoredCurve read_curve_csv(const std::filesystem::path& path);
StoredCurve parse_curve_csv(const std::string& text);

struct ImageScore {
  std::string id;
  ConfusionCounts counts;
  MetricTriple metrics;
};

struct EvalSummary {
  double threshold = 0.0;
  MetricTriple mean;
  std::optional<std::size_t> n_images;
  EmptyTruthPolicy policy = EmptyTruthPolicy::Include;
  bool postprocessed = false;
  std::vector<ImageScore> images;
};

/// Keys: threshold, mean_dice, mean_iou, mean_pixel_accuracy, n_images,
/// policy, postprocess.
std::string format_eval_json(const EvalSummary& summary);
/// Header: id,dice,iou,pixel_accuracy,tp,fp,tn,fn
std::string format_per_image_csv(const EvalSummary& summary);

}  // namespace segthresh
