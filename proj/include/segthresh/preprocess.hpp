#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "segthresh/types.hpp"

namespace segthresh {

/// Single-channel intensities in any finite range (normalize maps to [0, 1]).
class GrayImage {
 public:
  /// Throws std::invalid_argument on zero dimensions, length mismatch, or
  /// non-finite values.
  GrayImage(std::size_t width, std::size_t height, std::vector<double> values);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double at(std::size_t x, std::size_t y) const { return values_[y * width_ + x]; }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

 private:
  std::size_t width_;
  std::size_t height_;
  std::vector<double> values_;
};

inline constexpr std::size_t kModelInputSize = 256;

/// Bilinear resampling at pixel centers, edge-clamped.
GrayImage resize_image(const GrayImage& img, std::size_t target_width, std::size_t target_height);

/// Nearest-neighbor resampling at pixel centers; output stays two-valued.
BinaryMask resize_mask(const BinaryMask& mask, std::size_t target_width, std::size_t target_height);

/// Min-max rescale to [0, 1]. A constant image maps to all zeros.
GrayImage normalize(const GrayImage& img);

/// Foreground iff the min-max normalized value exceeds 0.5.
BinaryMask binarize_mask_image(const GrayImage& img);

struct AugmentationSpec {
  std::uint64_t seed = 0;
  double rotation_degrees = 15.0;        // angle drawn from [-r, r]
  double horizontal_flip_probability = 0.5;
  double vertical_flip_probability = 0.5;
  double intensity_shift = 0.1;          // additive shift drawn from [-s, s]

  /// Throws std::invalid_argument for probabilities outside [0, 1] or
  /// negative ranges.
  void validate() const;
};

/// Draws actually used for one sample; exposed for logging and tests.
struct AugmentationDraw {
  bool horizontal_flip = false;
  bool vertical_flip = false;
  double rotation_degrees = 0.0;
  double intensity_shift = 0.0;
};

AugmentationDraw draw_augmentation(const AugmentationSpec& spec, std::uint64_t sample_index);

struct AugmentedPair {
  GrayImage image;
  BinaryMask mask;
};

/// Applies flips, then a rotation about the image center (bilinear for the
/// image, nearest-neighbor for the mask, both edge-clamped), then the
/// intensity shift with clamping to [0, 1] on the image only. The draws are a
/// pure function of (spec.seed, sample_index). Throws ShapeError if image and
/// mask dimensions differ.
AugmentedPair augment(const GrayImage& img, const BinaryMask& mask, const AugmentationSpec& spec,
                      std::uint64_t sample_index);

}  // namespace segthresh
