#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace segthresh {

// All rasters are row-major with the origin at the top-left pixel.

/// Per-pixel foreground probabilities in [0, 1] as produced by a model.
/// Values are 32-bit so that PMAP files round-trip bit-exactly.
class ProbabilityMap {
 public:
  /// Throws std::invalid_argument on zero dimensions, length mismatch, NaN,
  /// or any value outside [0, 1].
  ProbabilityMap(std::size_t width, std::size_t height, std::vector<float> values);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<const float> values() const noexcept { return values_; }
  float at(std::size_t x, std::size_t y) const { return values_[y * width_ + x]; }

  friend bool operator==(const ProbabilityMap&, const ProbabilityMap&) = default;

 private:
  std::size_t width_;
  std::size_t height_;
  std::vector<float> values_;
};

/// Two-valued raster; 1 is foreground (nerve), 0 background. Stored as bytes
/// rather than vector<bool> so kernels can index without bit twiddling.
class BinaryMask {
 public:
  /// Throws std::invalid_argument on zero dimensions, length mismatch, or
  /// any byte other than 0 and 1.
  BinaryMask(std::size_t width, std::size_t height, std::vector<std::uint8_t> values);

  static BinaryMask filled(std::size_t width, std::size_t height, bool foreground);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<const std::uint8_t> values() const noexcept { return values_; }
  bool at(std::size_t x, std::size_t y) const { return values_[y * width_ + x] != 0; }
  std::size_t foreground_count() const noexcept;
  bool same_shape(const BinaryMask& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  std::size_t width_;
  std::size_t height_;
  std::vector<std::uint8_t> values_;
};

/// Inverts every pixel. Applied to a prediction it yields the predicted
/// background; applied to ground truth it yields the true background.
BinaryMask complement(const BinaryMask& mask);

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const noexcept { return tp + fp + tn + fn; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

struct MetricTriple {
  double dice = 0.0;
  double iou = 0.0;
  double pixel_accuracy = 0.0;

  friend bool operator==(const MetricTriple&, const MetricTriple&) = default;
};

/// Non-negative weights for dice, iou and pixel accuracy, normalized at
/// construction to sum to one.
class ObjectiveWeights {
 public:
  /// Throws std::invalid_argument if any weight is negative or non-finite,
  /// or if all three are zero.
  ObjectiveWeights(double dice, double iou, double pixel_accuracy);

  static ObjectiveWeights equal() { return {1.0, 1.0, 1.0}; }
  static ObjectiveWeights dice_only() { return {1.0, 0.0, 0.0}; }

  double dice() const noexcept { return dice_; }
  double iou() const noexcept { return iou_; }
  double pixel_accuracy() const noexcept { return pixel_accuracy_; }

  friend bool operator==(const ObjectiveWeights&, const ObjectiveWeights&) = default;

 private:
  double dice_;
  double iou_;
  double pixel_accuracy_;
};

/// Non-empty, strictly increasing candidate thresholds within [0, 1].
class ThresholdGrid {
 public:
  explicit ThresholdGrid(std::vector<double> thresholds);

  /// start, start+step, ... up to and including stop (within 1e-9 of a step).
  /// Values are snapped to 12 decimals so 0.14 is the same double as the
  /// literal 0.14.
  static ThresholdGrid uniform(double start, double stop, double step);

  /// The default 0.01..0.99 grid in steps of 0.01.
  static ThresholdGrid standard() { return uniform(0.01, 0.99, 0.01); }

  std::size_t size() const noexcept { return thresholds_.size(); }
  std::span<const double> values() const noexcept { return thresholds_; }
  double operator[](std::size_t i) const { return thresholds_[i]; }

  friend bool operator==(const ThresholdGrid&, const ThresholdGrid&) = default;

 private:
  std::vector<double> thresholds_;
};

enum class Split { Train, Validation, Test, Unspecified };

std::string_view to_string(Split split) noexcept;
/// Accepts "train", "validation", "test", "unspecified".
Split parse_split(std::string_view text);

/// Descriptive metadata only; never consulted by any computation.
struct EvaluationTag {
  std::optional<std::uint32_t> epoch;
  Split split = Split::Unspecified;

  friend bool operator==(const EvaluationTag&, const EvaluationTag&) = default;
};

}  // namespace segthresh
