#pragma once

#include "segthresh/types.hpp"

namespace segthresh {

/// Foreground iff probability > threshold (strict). Threshold 1.0 therefore
/// always yields an empty mask. Throws std::invalid_argument if the
/// threshold is outside [0, 1].
BinaryMask binarize(const ProbabilityMap& map, double threshold);

/// Pixel tallies of `pred` against `truth`. Throws ShapeError on mismatch.
ConfusionCounts confusion(const BinaryMask& pred, const BinaryMask& truth);

// Both metrics are 0/0 when prediction and truth are empty; that case is
// scored 1.0 (correctly predicting "no nerve" is a perfect prediction).

/// 2·tp / (2·tp + fp + fn)
double dice(const ConfusionCounts& counts) noexcept;
/// tp / (tp + fp + fn)
double iou(const ConfusionCounts& counts) noexcept;
/// (tp + tn) / total. Throws std::invalid_argument when total is zero.
double pixel_accuracy(const ConfusionCounts& counts);

MetricTriple metrics_from(const ConfusionCounts& counts);

/// binarize -> confusion -> metrics_from.
MetricTriple evaluate_pair(const ProbabilityMap& map, const BinaryMask& truth, double threshold);

}  // namespace segthresh
