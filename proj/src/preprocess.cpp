#include "segthresh/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "segthresh/errors.hpp"
#include "segthresh/rng.hpp"

namespace segthresh {

GrayImage::GrayImage(std::size_t width, std::size_t height, std::vector<double> values)
    : width_(width), height_(height), values_(std::move(values)) {
  if (width_ == 0 || height_ == 0) {
    throw std::invalid_argument("GrayImage: dimensions must be positive");
  }
  if (values_.size() != width_ * height_) {
    throw std::invalid_argument("GrayImage: value count does not match dimensions");
  }
  if (!std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); })) {
    throw std::invalid_argument("GrayImage: values must be finite");
  }
}

namespace {

void check_target(std::size_t w, std::size_t h) {
  if (w == 0 || h == 0) {
    throw std::invalid_argument("resize: target dimensions must be positive");
  }
}

double clamp_coord(double v, std::size_t extent) {
  return std::clamp(v, 0.0, static_cast<double>(extent - 1));
}

double sample_bilinear(const GrayImage& img, double sx, double sy) {
  sx = clamp_coord(sx, img.width());
  sy = clamp_coord(sy, img.height());
  const auto x0 = static_cast<std::size_t>(std::floor(sx));
  const auto y0 = static_cast<std::size_t>(std::floor(sy));
  const std::size_t x1 = std::min(x0 + 1, img.width() - 1);
  const std::size_t y1 = std::min(y0 + 1, img.height() - 1);
  const double fx = sx - static_cast<double>(x0);
  const double fy = sy - static_cast<double>(y0);
  const double top = img.at(x0, y0) * (1.0 - fx) + img.at(x1, y0) * fx;
  const double bottom = img.at(x0, y1) * (1.0 - fx) + img.at(x1, y1) * fx;
  return top * (1.0 - fy) + bottom * fy;
}

std::size_t nearest_index(double s, std::size_t extent) {
  return static_cast<std::size_t>(std::floor(clamp_coord(s, extent) + 0.5));
}

GrayImage flip(const GrayImage& img, bool horizontal, bool vertical) {
  std::vector<double> out(img.size());
  const std::size_t w = img.width(), h = img.height();
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      out[y * w + x] = img.at(horizontal ? w - 1 - x : x, vertical ? h - 1 - y : y);
    }
  }
  return GrayImage(w, h, std::move(out));
}

BinaryMask flip(const BinaryMask& mask, bool horizontal, bool vertical) {
  std::vector<std::uint8_t> out(mask.size());
  const std::size_t w = mask.width(), h = mask.height();
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      out[y * w + x] = mask.at(horizontal ? w - 1 - x : x, vertical ? h - 1 - y : y) ? 1 : 0;
    }
  }
  return BinaryMask(w, h, std::move(out));
}

// Inverse-maps each output pixel through a rotation about the image center.
struct Rotation {
  double cos_a;
  double sin_a;
  double cx;
  double cy;

  Rotation(double degrees, std::size_t w, std::size_t h)
      : cos_a(std::cos(degrees * std::numbers::pi / 180.0)),
        sin_a(std::sin(degrees * std::numbers::pi / 180.0)),
        cx((static_cast<double>(w) - 1.0) / 2.0),
        cy((static_cast<double>(h) - 1.0) / 2.0) {}

  void source(std::size_t x, std::size_t y, double& sx, double& sy) const {
    const double dx = static_cast<double>(x) - cx;
    const double dy = static_cast<double>(y) - cy;
    sx = cos_a * dx + sin_a * dy + cx;
    sy = -sin_a * dx + cos_a * dy + cy;
  }
};

}  // namespace

GrayImage resize_image(const GrayImage& img, std::size_t tw, std::size_t th) {
  check_target(tw, th);
  const double scale_x = static_cast<double>(img.width()) / static_cast<double>(tw);
  const double scale_y = static_cast<double>(img.height()) / static_cast<double>(th);
  std::vector<double> out(tw * th);
  for (std::size_t y = 0; y < th; ++y) {
    const double sy = (static_cast<double>(y) + 0.5) * scale_y - 0.5;
    for (std::size_t x = 0; x < tw; ++x) {
      const double sx = (static_cast<double>(x) + 0.5) * scale_x - 0.5;
      out[y * tw + x] = sample_bilinear(img, sx, sy);
    }
  }
  return GrayImage(tw, th, std::move(out));
}

BinaryMask resize_mask(const BinaryMask& mask, std::size_t tw, std::size_t th) {
  check_target(tw, th);
  const double scale_x = static_cast<double>(mask.width()) / static_cast<double>(tw);
  const double scale_y = static_cast<double>(mask.height()) / static_cast<double>(th);
  std::vector<std::uint8_t> out(tw * th);
  for (std::size_t y = 0; y < th; ++y) {
    const auto sy = std::min(static_cast<std::size_t>((static_cast<double>(y) + 0.5) * scale_y),
                             mask.height() - 1);
    for (std::size_t x = 0; x < tw; ++x) {
      const auto sx = std::min(static_cast<std::size_t>((static_cast<double>(x) + 0.5) * scale_x),
                               mask.width() - 1);
      out[y * tw + x] = mask.at(sx, sy) ? 1 : 0;
    }
  }
  return BinaryMask(tw, th, std::move(out));
}

GrayImage normalize(const GrayImage& img) {
  const auto [lo_it, hi_it] = std::minmax_element(img.values().begin(), img.values().end());
  const double lo = *lo_it;
  const double range = *hi_it - lo;
  std::vector<double> out(img.size(), 0.0);
  if (range > 0.0) {
    std::transform(img.values().begin(), img.values().end(), out.begin(),
                   [&](double v) { return (v - lo) / range; });
  }
  return GrayImage(img.width(), img.height(), std::move(out));
}

BinaryMask binarize_mask_image(const GrayImage& img) {
  const GrayImage norm = normalize(img);
  std::vector<std::uint8_t> out(norm.size());
  std::transform(norm.values().begin(), norm.values().end(), out.begin(),
                 [](double v) -> std::uint8_t { return v > 0.5 ? 1 : 0; });
  return BinaryMask(norm.width(), norm.height(), std::move(out));
}

void AugmentationSpec::validate() const {
  const auto is_prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!is_prob(horizontal_flip_probability) || !is_prob(vertical_flip_probability)) {
    throw std::invalid_argument("AugmentationSpec: flip probabilities must be in [0, 1]");
  }
  if (!(rotation_degrees >= 0.0) || !(intensity_shift >= 0.0)) {
    throw std::invalid_argument("AugmentationSpec: ranges must be non-negative");
  }
}

AugmentationDraw draw_augmentation(const AugmentationSpec& spec, std::uint64_t sample_index) {
  spec.validate();
  // Always consume four draws in a fixed order so the stream layout does not
  // depend on which transforms are enabled.
  RandomStream rng = RandomStream::substream(spec.seed, sample_index);
  AugmentationDraw d;
  d.horizontal_flip = rng.bernoulli(spec.horizontal_flip_probability);
  d.vertical_flip = rng.bernoulli(spec.vertical_flip_probability);
  d.rotation_degrees = rng.uniform(-spec.rotation_degrees, spec.rotation_degrees);
  d.intensity_shift = rng.uniform(-spec.intensity_shift, spec.intensity_shift);
  return d;
}

AugmentedPair augment(const GrayImage& img, const BinaryMask& mask, const AugmentationSpec& spec,
                      std::uint64_t sample_index) {
  if (img.width() != mask.width() || img.height() != mask.height()) {
    throw ShapeError("augment: image is " + std::to_string(img.width()) + "x" +
                     std::to_string(img.height()) + " but mask is " +
                     std::to_string(mask.width()) + "x" + std::to_string(mask.height()));
  }
  const AugmentationDraw d = draw_augmentation(spec, sample_index);
  GrayImage image = flip(img, d.horizontal_flip, d.vertical_flip);
  BinaryMask labels = flip(mask, d.horizontal_flip, d.vertical_flip);

  const std::size_t w = img.width(), h = img.height();
  if (d.rotation_degrees != 0.0) {
    const Rotation rot(d.rotation_degrees, w, h);
    std::vector<double> rotated(w * h);
    std::vector<std::uint8_t> rotated_mask(w * h);
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        double sx, sy;
        rot.source(x, y, sx, sy);
        rotated[y * w + x] = sample_bilinear(image, sx, sy);
        rotated_mask[y * w + x] = labels.at(nearest_index(sx, w), nearest_index(sy, h)) ? 1 : 0;
      }
    }
    image = GrayImage(w, h, std::move(rotated));
    labels = BinaryMask(w, h, std::move(rotated_mask));
  }

  if (d.intensity_shift != 0.0) {
    std::vector<double> shifted(image.values().begin(), image.values().end());
    for (double& v : shifted) v = std::clamp(v + d.intensity_shift, 0.0, 1.0);
    image = GrayImage(w, h, std::move(shifted));
  }
  return {std::move(image), std::move(labels)};
}

}  // namespace segthresh
