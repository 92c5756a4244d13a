#include "segthresh/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

#include "segthresh/dataset_io.hpp"
#include "segthresh/errors.hpp"
#include "segthresh/metrics.hpp"
#include "segthresh/rng.hpp"
#include "segthresh/sweep.hpp"
#include "parallel.hpp"

namespace segthresh {

namespace fs = std::filesystem;

void SynthSpec::validate() const {
  if (width == 0 || height == 0) throw std::invalid_argument("SynthSpec: image size must be positive");
  if (!(presence_probability >= 0.0 && presence_probability <= 1.0)) {
    throw std::invalid_argument("SynthSpec: presence probability must be in [0, 1]");
  }
  if (min_blobs > max_blobs || min_blobs == 0) {
    throw std::invalid_argument("SynthSpec: blob count range must satisfy 1 <= min <= max");
  }
  if (!(min_radius > 0.0 && min_radius <= max_radius)) {
    throw std::invalid_argument("SynthSpec: radius range must satisfy 0 < min <= max");
  }
  if (!(min_aspect > 0.0 && min_aspect <= max_aspect && max_aspect <= 1.0)) {
    throw std::invalid_argument("SynthSpec: aspect range must satisfy 0 < min <= max <= 1");
  }
  if (!(noise_amplitude >= 0.0)) throw std::invalid_argument("SynthSpec: noise amplitude must be non-negative");
  if (planted_threshold) {
    const double t = *planted_threshold;
    if (!(plant_band > 0.0 && plant_grid_step > 0.0 && plant_band < plant_grid_step)) {
      throw std::invalid_argument("SynthSpec: plant band must be positive and narrower than the grid step");
    }
    if (!(t - plant_band > 0.0 && t + plant_band < 1.0)) {
      throw std::invalid_argument("SynthSpec: planted threshold band must lie inside (0, 1)");
    }
  }
}

namespace {

// Mask and map draws come from disjoint substreams of the same seed.
RandomStream mask_stream(const SynthSpec& spec, std::uint64_t index) {
  return RandomStream::substream(spec.seed, 2 * index);
}

RandomStream map_stream(const SynthSpec& spec, std::uint64_t index) {
  return RandomStream::substream(spec.seed, 2 * index + 1);
}

void draw_ellipse(std::vector<std::uint8_t>& pixels, std::size_t w, std::size_t h,
                  RandomStream& rng, const SynthSpec& spec) {
  const double major = rng.uniform(spec.min_radius, spec.max_radius);
  const double minor = major * rng.uniform(spec.min_aspect, spec.max_aspect);
  const double angle = rng.uniform(0.0, std::numbers::pi);
  const auto center = [&](std::size_t extent) {
    const double hi = static_cast<double>(extent - 1) - major;
    return hi > major ? rng.uniform(major, hi) : static_cast<double>(extent - 1) / 2.0;
  };
  const double cx = center(w);
  const double cy = center(h);
  const double c = std::cos(angle), s = std::sin(angle);

  const auto lo = [&](double v) { return static_cast<std::ptrdiff_t>(std::max(0.0, std::floor(v - major))); };
  const auto hi = [&](double v, std::size_t extent) {
    return static_cast<std::ptrdiff_t>(std::min(static_cast<double>(extent - 1), std::ceil(v + major)));
  };
  for (std::ptrdiff_t y = lo(cy); y <= hi(cy, h); ++y) {
    for (std::ptrdiff_t x = lo(cx); x <= hi(cx, w); ++x) {
      const double dx = static_cast<double>(x) - cx;
      const double dy = static_cast<double>(y) - cy;
      const double u = (dx * c + dy * s) / major;
      const double v = (-dx * s + dy * c) / minor;
      if (u * u + v * v <= 1.0) pixels[static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x)] = 1;
    }
  }
  pixels[static_cast<std::size_t>(std::lround(cy)) * w + static_cast<std::size_t>(std::lround(cx))] = 1;
}

// Separable box filter with edge clamping.
std::vector<double> box_blur(std::vector<double> img, std::size_t w, std::size_t h, std::size_t radius) {
  if (radius == 0) return img;
  const auto r = static_cast<std::ptrdiff_t>(radius);
  const double norm = 1.0 / static_cast<double>(2 * radius + 1);
  std::vector<double> tmp(img.size());
  const auto clamp_idx = [](std::ptrdiff_t i, std::size_t extent) {
    return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(i, 0, static_cast<std::ptrdiff_t>(extent) - 1));
  };
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      double acc = 0.0;
      for (std::ptrdiff_t k = -r; k <= r; ++k) acc += img[y * w + clamp_idx(static_cast<std::ptrdiff_t>(x) + k, w)];
      tmp[y * w + x] = acc * norm;
    }
  }
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      double acc = 0.0;
      for (std::ptrdiff_t k = -r; k <= r; ++k) acc += tmp[clamp_idx(static_cast<std::ptrdiff_t>(y) + k, h) * w + x];
      img[y * w + x] = acc * norm;
    }
  }
  return img;
}

// Thresholds in [cut_low, cut_high) all give the Dice-best mask of `values`.
struct OptimalCut {
  double cut_low;
  double cut_high;
};

OptimalCut best_cut(const std::vector<float>& values, const BinaryMask& truth) {
  std::vector<float> fg, bg, levels;
  for (std::size_t i = 0; i < values.size(); ++i) {
    (truth.values()[i] ? fg : bg).push_back(values[i]);
  }
  std::sort(fg.begin(), fg.end());
  std::sort(bg.begin(), bg.end());
  levels.reserve(values.size() + 1);
  levels.push_back(0.0f);
  levels.insert(levels.end(), values.begin(), values.end());
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

  std::size_t below_fg = 0, below_bg = 0, best = 0;
  double best_dice = -1.0;
  for (std::size_t k = 0; k < levels.size(); ++k) {
    while (below_fg < fg.size() && fg[below_fg] <= levels[k]) ++below_fg;
    while (below_bg < bg.size() && bg[below_bg] <= levels[k]) ++below_bg;
    ConfusionCounts c;
    c.tp = fg.size() - below_fg;
    c.fn = below_fg;
    c.fp = bg.size() - below_bg;
    c.tn = below_bg;
    const double d = dice(c);
    if (d > best_dice) {
      best_dice = d;
      best = k;
    }
  }
  return {levels[best], best + 1 < levels.size() ? static_cast<double>(levels[best + 1]) : 1.0};
}

// Monotone piecewise-linear map through the given knots (x strictly increasing).
double remap(double p, const std::vector<std::pair<double, double>>& knots) {
  for (std::size_t i = 1; i < knots.size(); ++i) {
    if (p <= knots[i].first) {
      const auto [x0, y0] = knots[i - 1];
      const auto [x1, y1] = knots[i];
      return y0 + (p - x0) * (y1 - y0) / (x1 - x0);
    }
  }
  return knots.back().second;
}

}  // namespace

BinaryMask gen_mask(const SynthSpec& spec, std::uint64_t index) {
  spec.validate();
  RandomStream rng = mask_stream(spec, index);
  std::vector<std::uint8_t> pixels(spec.width * spec.height, 0);
  if (rng.bernoulli(spec.presence_probability)) {
    const std::size_t blobs = spec.min_blobs + rng.below(spec.max_blobs - spec.min_blobs + 1);
    for (std::size_t b = 0; b < blobs; ++b) draw_ellipse(pixels, spec.width, spec.height, rng, spec);
  }
  return BinaryMask(spec.width, spec.height, std::move(pixels));
}

GeneratedMap gen_probability_map(const BinaryMask& mask, const SynthSpec& spec, std::uint64_t index) {
  spec.validate();
  const std::size_t w = mask.width(), h = mask.height();
  std::vector<double> field(mask.values().begin(), mask.values().end());
  field = box_blur(std::move(field), w, h, spec.blur_radius);

  RandomStream rng = map_stream(spec, index);
  std::vector<float> values(field.size());
  for (std::size_t i = 0; i < field.size(); ++i) {
    const double noise = spec.noise_amplitude > 0.0 ? rng.uniform(-spec.noise_amplitude, spec.noise_amplitude) : 0.0;
    values[i] = static_cast<float>(std::clamp(field[i] + noise, 0.0, 1.0));
  }

  if (!spec.planted_threshold) {
    return {ProbabilityMap(w, h, std::move(values)), std::nullopt, std::nullopt};
  }

  const double plant = *spec.planted_threshold;
  const OptimalCut cut = best_cut(values, mask);
  std::vector<std::pair<double, double>> knots{{0.0, 0.0}};
  if (cut.cut_low > 0.0) knots.emplace_back(cut.cut_low, plant - spec.plant_band);
  if (cut.cut_high < 1.0) knots.emplace_back(cut.cut_high, plant + spec.plant_band);
  knots.emplace_back(1.0, 1.0);
  for (float& v : values) v = static_cast<float>(std::clamp(remap(v, knots), 0.0, 1.0));
  ProbabilityMap map(w, h, std::move(values));

  // Brute-force check that the plant is where the construction says.
  const double step = spec.plant_grid_step;
  const ThresholdGrid grid = ThresholdGrid::uniform(step, 1.0 - step, step);
  const PerImageCurve curve = sweep_image(map, mask, grid);
  std::size_t best = 0;
  double lowest = 2.0;
  std::vector<double> dices;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    dices.push_back(dice(curve.counts[i]));
    if (dices[i] > dices[best]) best = i;
    lowest = std::min(lowest, dices[i]);
  }
  const bool flat = lowest == dices[best];
  if (!flat && std::abs(grid[best] - plant) > step + 1e-9) {
    throw std::runtime_error("synth: plant verification failed for index " + std::to_string(index) +
                             ": best grid threshold " + std::to_string(grid[best]) + " vs plant " +
                             std::to_string(plant));
  }
  return {std::move(map), plant, grid[best]};
}

std::string synth_id(std::uint64_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "synth_%06llu", static_cast<unsigned long long>(index));
  return buf;
}

SynthSample gen_sample(const SynthSpec& spec, std::uint64_t index) {
  BinaryMask mask = gen_mask(spec, index);
  GeneratedMap generated = gen_probability_map(mask, spec, index);
  return {synth_id(index), std::move(mask), std::move(generated)};
}

void write_synth_dataset(const SynthSpec& spec, std::size_t count, const fs::path& out_dir, int workers) {
  spec.validate();
  if (count == 0) throw EmptyDatasetError("synth: sample count must be positive");

  std::vector<std::optional<double>> best(count);
  detail::parallel_items(
      count, workers,
      [&](std::size_t i) {
        const SynthSample s = gen_sample(spec, i);
        write_pmap(s.generated.map, out_dir / "pmaps" / (s.id + ".pmap"));
        write_mask(s.mask, out_dir / "masks" / (s.id + ".png"));
        best[i] = s.generated.verified_best;
      },
      [](std::size_t i) { return synth_id(i); });

  std::vector<std::string> ids;
  ids.reserve(count);
  for (std::size_t i = 0; i < count; ++i) ids.push_back(synth_id(i));
  DatasetManifest manifest;
  for (auto& [id, split] : split_dataset(ids, spec.seed)) {
    manifest.records.push_back({id, fs::path("pmaps") / (id + ".pmap"), fs::path("masks") / (id + ".png"),
                                EvaluationTag{std::nullopt, split}});
  }
  write_manifest(manifest, out_dir / "manifest.tsv");

  std::string sidecar;
  char line[128];
  if (spec.planted_threshold) {
    std::snprintf(line, sizeof line, "planted_threshold\t%.6f\nplant_band\t%.6f\ngrid_step\t%.6f\n",
                  *spec.planted_threshold, spec.plant_band, spec.plant_grid_step);
  } else {
    std::snprintf(line, sizeof line, "planted_threshold\tnone\n");
  }
  sidecar += line;
  sidecar += "images\t" + std::to_string(count) + "\n# id\tverified_best_threshold\n";
  for (std::size_t i = 0; i < count; ++i) {
    if (best[i]) {
      std::snprintf(line, sizeof line, "%s\t%.6f\n", synth_id(i).c_str(), *best[i]);
    } else {
      std::snprintf(line, sizeof line, "%s\tnone\n", synth_id(i).c_str());
    }
    sidecar += line;
  }
  write_file_atomic(out_dir / "plant.txt", sidecar);
}

}  // namespace segthresh
