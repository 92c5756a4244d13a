#include "segthresh/morphology.hpp"

#include <stdexcept>
#include <string>

namespace segthresh {

StructuringElement::StructuringElement(std::size_t width, std::size_t height,
                                       std::vector<std::uint8_t> cells)
    : width_(width), height_(height), cells_(std::move(cells)) {
  if (width_ % 2 == 0 || height_ % 2 == 0) {
    throw std::invalid_argument("StructuringElement: dimensions must be odd");
  }
  if (cells_.size() != width_ * height_) {
    throw std::invalid_argument("StructuringElement: cell count does not match dimensions");
  }
  if (!at(width_ / 2, height_ / 2)) {
    throw std::invalid_argument("StructuringElement: anchor cell must be set");
  }
  const auto cx = static_cast<std::ptrdiff_t>(width_ / 2);
  const auto cy = static_cast<std::ptrdiff_t>(height_ / 2);
  for (std::size_t y = 0; y < height_; ++y) {
    for (std::size_t x = 0; x < width_; ++x) {
      if (at(x, y)) {
        offsets_.push_back({static_cast<std::ptrdiff_t>(x) - cx, static_cast<std::ptrdiff_t>(y) - cy});
      }
    }
  }
}

StructuringElement StructuringElement::cross3() {
  return StructuringElement(3, 3, {0, 1, 0, 1, 1, 1, 0, 1, 0});
}

StructuringElement StructuringElement::square3() {
  return StructuringElement(3, 3, std::vector<std::uint8_t>(9, 1));
}

StructuringElement StructuringElement::named(std::string_view name) {
  if (name == "cross3") return cross3();
  if (name == "square3") return square3();
  throw std::invalid_argument("unknown structuring element '" + std::string(name) + "'");
}

bool StructuringElement::symmetric() const noexcept {
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    if (cells_[i] != cells_[cells_.size() - 1 - i]) return false;
  }
  return true;
}

namespace {

template <bool kAll>
BinaryMask apply(const BinaryMask& mask, const StructuringElement& se, Border border) {
  const auto w = static_cast<std::ptrdiff_t>(mask.width());
  const auto h = static_cast<std::ptrdiff_t>(mask.height());
  const auto in = mask.values();
  const bool outside = border == Border::Foreground;
  std::vector<std::uint8_t> out(mask.size());
  for (std::ptrdiff_t y = 0; y < h; ++y) {
    for (std::ptrdiff_t x = 0; x < w; ++x) {
      bool hit = kAll;
      for (const auto& o : se.offsets()) {
        const std::ptrdiff_t sx = x + o.dx;
        const std::ptrdiff_t sy = y + o.dy;
        const bool v = (sx < 0 || sy < 0 || sx >= w || sy >= h)
                           ? outside
                           : in[static_cast<std::size_t>(sy * w + sx)] != 0;
        if (v != kAll) {
          hit = v;
          break;
        }
      }
      out[static_cast<std::size_t>(y * w + x)] = hit ? 1 : 0;
    }
  }
  return BinaryMask(mask.width(), mask.height(), std::move(out));
}

}  // namespace

BinaryMask erode(const BinaryMask& mask, const StructuringElement& se, Border border) {
  return apply<true>(mask, se, border);
}

BinaryMask dilate(const BinaryMask& mask, const StructuringElement& se, Border border) {
  return apply<false>(mask, se, border);
}

BinaryMask opening(const BinaryMask& mask, const StructuringElement& se) {
  return dilate(erode(mask, se), se);
}

BinaryMask closing(const BinaryMask& mask, const StructuringElement& se) {
  return erode(dilate(mask, se), se);
}

MorphOp parse_morph_op(std::string_view name) {
  if (name == "erode") return MorphOp::Erode;
  if (name == "dilate") return MorphOp::Dilate;
  if (name == "open") return MorphOp::Open;
  if (name == "close") return MorphOp::Close;
  throw std::invalid_argument("unknown morphological operation '" + std::string(name) + "'");
}

std::string_view to_string(MorphOp op) noexcept {
  switch (op) {
    case MorphOp::Erode: return "erode";
    case MorphOp::Dilate: return "dilate";
    case MorphOp::Open: return "open";
    case MorphOp::Close: return "close";
  }
  return "open";
}

BinaryMask postprocess(const BinaryMask& mask, const PostprocessConfig& config) {
  BinaryMask out = mask;
  for (const MorphOp op : config.ops) {
    switch (op) {
      case MorphOp::Erode: out = erode(out, config.se); break;
      case MorphOp::Dilate: out = dilate(out, config.se); break;
      case MorphOp::Open: out = opening(out, config.se); break;
      case MorphOp::Close: out = closing(out, config.se); break;
    }
  }
  return out;
}

}  // namespace segthresh
