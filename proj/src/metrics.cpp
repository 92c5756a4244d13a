#include "segthresh/metrics.hpp"

#include <stdexcept>
#include <string>

#include "segthresh/errors.hpp"

namespace segthresh {

namespace {

std::string dims(const BinaryMask& m) {
  return std::to_string(m.width()) + "x" + std::to_string(m.height());
}

}  // namespace

BinaryMask binarize(const ProbabilityMap& map, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw std::invalid_argument("binarize: threshold " + std::to_string(threshold) +
                                " is outside [0, 1]");
  }
  const auto in = map.values();
  std::vector<std::uint8_t> out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    out[i] = static_cast<double>(in[i]) > threshold ? 1 : 0;
  }
  return BinaryMask(map.width(), map.height(), std::move(out));
}

ConfusionCounts confusion(const BinaryMask& pred, const BinaryMask& truth) {
  if (!pred.same_shape(truth)) {
    throw ShapeError("confusion: prediction is " + dims(pred) + " but truth is " + dims(truth));
  }
  const auto p = pred.values();
  const auto g = truth.values();
  std::uint64_t tp = 0, pred_fg = 0, truth_fg = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    tp += p[i] & g[i];
    pred_fg += p[i];
    truth_fg += g[i];
  }
  ConfusionCounts c;
  c.tp = tp;
  c.fp = pred_fg - tp;
  c.fn = truth_fg - tp;
  c.tn = p.size() - tp - c.fp - c.fn;
  return c;
}

double dice(const ConfusionCounts& c) noexcept {
  const std::uint64_t denom = 2 * c.tp + c.fp + c.fn;
  if (denom == 0) return 1.0;
  return static_cast<double>(2 * c.tp) / static_cast<double>(denom);
}

double iou(const ConfusionCounts& c) noexcept {
  const std::uint64_t denom = c.tp + c.fp + c.fn;
  if (denom == 0) return 1.0;
  return static_cast<double>(c.tp) / static_cast<double>(denom);
}

double pixel_accuracy(const ConfusionCounts& c) {
  const std::uint64_t total = c.total();
  if (total == 0) {
    throw std::invalid_argument("pixel_accuracy: confusion counts are all zero");
  }
  return static_cast<double>(c.tp + c.tn) / static_cast<double>(total);
}

MetricTriple metrics_from(const ConfusionCounts& counts) {
  return {dice(counts), iou(counts), pixel_accuracy(counts)};
}

MetricTriple evaluate_pair(const ProbabilityMap& map, const BinaryMask& truth, double threshold) {
  return metrics_from(confusion(binarize(map, threshold), truth));
}

}  // namespace segthresh
