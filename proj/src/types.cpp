#include "segthresh/types.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "segthresh/errors.hpp"

namespace segthresh {

namespace {

void check_dims(std::size_t width, std::size_t height, std::size_t length, const char* what) {
  if (width == 0 || height == 0) {
    throw std::invalid_argument(std::string(what) + ": dimensions must be positive");
  }
  if (length != width * height) {
    throw std::invalid_argument(std::string(what) + ": " + std::to_string(length) +
                                " values for " + std::to_string(width) + "x" +
                                std::to_string(height));
  }
}

}  // namespace

PmapParseError::PmapParseError(Kind kind, std::size_t offset, const std::string& what)
    : std::runtime_error("PMAP parse error at byte " + std::to_string(offset) + ": " + what),
      kind_(kind),
      offset_(offset) {}

ProbabilityMap::ProbabilityMap(std::size_t width, std::size_t height, std::vector<float> values)
    : width_(width), height_(height), values_(std::move(values)) {
  check_dims(width_, height_, values_.size(), "ProbabilityMap");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const float v = values_[i];
    // NaN fails both comparisons.
    if (!(v >= 0.0f && v <= 1.0f)) {
      throw std::invalid_argument("ProbabilityMap: value at index " + std::to_string(i) +
                                  " is outside [0, 1]");
    }
  }
}

BinaryMask::BinaryMask(std::size_t width, std::size_t height, std::vector<std::uint8_t> values)
    : width_(width), height_(height), values_(std::move(values)) {
  check_dims(width_, height_, values_.size(), "BinaryMask");
  if (std::any_of(values_.begin(), values_.end(), [](std::uint8_t v) { return v > 1; })) {
    throw std::invalid_argument("BinaryMask: values must be 0 or 1");
  }
}

BinaryMask BinaryMask::filled(std::size_t width, std::size_t height, bool foreground) {
  return BinaryMask(width, height,
                    std::vector<std::uint8_t>(width * height, foreground ? 1 : 0));
}

std::size_t BinaryMask::foreground_count() const noexcept {
  return static_cast<std::size_t>(std::count(values_.begin(), values_.end(), std::uint8_t{1}));
}

BinaryMask complement(const BinaryMask& mask) {
  std::vector<std::uint8_t> out(mask.size());
  std::transform(mask.values().begin(), mask.values().end(), out.begin(),
                 [](std::uint8_t v) { return static_cast<std::uint8_t>(v ^ 1u); });
  return BinaryMask(mask.width(), mask.height(), std::move(out));
}

ObjectiveWeights::ObjectiveWeights(double dice, double iou, double pixel_accuracy) {
  for (double w : {dice, iou, pixel_accuracy}) {
    if (!std::isfinite(w) || w < 0.0) {
      throw std::invalid_argument("ObjectiveWeights: weights must be finite and non-negative");
    }
  }
  const double sum = dice + iou + pixel_accuracy;
  if (sum <= 0.0) {
    throw std::invalid_argument("ObjectiveWeights: at least one weight must be positive");
  }
  dice_ = dice / sum;
  iou_ = iou / sum;
  pixel_accuracy_ = pixel_accuracy / sum;
}

ThresholdGrid::ThresholdGrid(std::vector<double> thresholds) : thresholds_(std::move(thresholds)) {
  if (thresholds_.empty()) {
    throw std::invalid_argument("ThresholdGrid: grid is empty");
  }
  for (std::size_t i = 0; i < thresholds_.size(); ++i) {
    const double t = thresholds_[i];
    if (!(t >= 0.0 && t <= 1.0)) {
      throw std::invalid_argument("ThresholdGrid: threshold " + std::to_string(t) +
                                  " is outside [0, 1]");
    }
    if (i > 0 && !(t > thresholds_[i - 1])) {
      throw std::invalid_argument("ThresholdGrid: thresholds must be strictly increasing");
    }
  }
}

ThresholdGrid ThresholdGrid::uniform(double start, double stop, double step) {
  if (!(step > 0.0) || !std::isfinite(step)) {
    throw std::invalid_argument("ThresholdGrid: step must be positive");
  }
  if (!(start <= stop)) {
    throw std::invalid_argument("ThresholdGrid: start must not exceed stop");
  }
  const double span = (stop - start) / step;
  const auto last = static_cast<std::size_t>(std::floor(span + 1e-9));
  std::vector<double> values;
  values.reserve(last + 1);
  for (std::size_t i = 0; i <= last; ++i) {
    const double t = start + static_cast<double>(i) * step;
    values.push_back(std::round(t * 1e12) / 1e12);
  }
  return ThresholdGrid(std::move(values));
}

std::string_view to_string(Split split) noexcept {
  switch (split) {
    case Split::Train: return "train";
    case Split::Validation: return "validation";
    case Split::Test: return "test";
    case Split::Unspecified: return "unspecified";
  }
  return "unspecified";
}

Split parse_split(std::string_view text) {
  if (text == "train") return Split::Train;
  if (text == "validation") return Split::Validation;
  if (text == "test") return Split::Test;
  if (text == "unspecified") return Split::Unspecified;
  throw std::invalid_argument("unknown split '" + std::string(text) + "'");
}

}  // namespace segthresh
