#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "segthresh/types.hpp"

namespace segthresh {

/// Odd-sized boolean neighborhood anchored at its center cell, which must be set.
class StructuringElement {
 public:
  StructuringElement(std::size_t width, std::size_t height, std::vector<std::uint8_t> cells);

  /// 4-connected 3x3 cross (the default).
  static StructuringElement cross3();
  /// Full 3x3 square.
  static StructuringElement square3();
  /// "cross3" or "square3".
  static StructuringElement named(std::string_view name);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  bool at(std::size_t x, std::size_t y) const { return cells_[y * width_ + x] != 0; }
  /// Invariant under 180 degree rotation.
  bool symmetric() const noexcept;

  struct Offset {
    std::ptrdiff_t dx;
    std::ptrdiff_t dy;
  };
  std::span<const Offset> offsets() const noexcept { return offsets_; }

 private:
  std::size_t width_;
  std::size_t height_;
  std::vector<std::uint8_t> cells_;
  std::vector<Offset> offsets_;
};

/// Value assumed for pixels outside the mask.
enum class Border { Background, Foreground };

/// Pixel survives iff every set SE cell centered on it lands on foreground.
BinaryMask erode(const BinaryMask& mask, const StructuringElement& se,
                 Border border = Border::Background);

/// Pixel is set iff any set SE cell centered on it lands on foreground.
/// For symmetric SEs, dilate(m, se, b) == complement(erode(complement(m), se, !b)).
BinaryMask dilate(const BinaryMask& mask, const StructuringElement& se,
                  Border border = Border::Background);

/// dilate(erode(m)); removes speckle narrower than the SE.
BinaryMask opening(const BinaryMask& mask, const StructuringElement& se);
/// erode(dilate(m)); bridges gaps narrower than the SE.
BinaryMask closing(const BinaryMask& mask, const StructuringElement& se);

enum class MorphOp { Erode, Dilate, Open, Close };

MorphOp parse_morph_op(std::string_view name);
std::string_view to_string(MorphOp op) noexcept;

struct PostprocessConfig {
  StructuringElement se = StructuringElement::cross3();
  std::vector<MorphOp> ops{MorphOp::Open, MorphOp::Close};
};

/// Applies `config.ops` in order. Defaults to open then close with the cross.
BinaryMask postprocess(const BinaryMask& mask, const PostprocessConfig& config = {});

}  // namespace segthresh
