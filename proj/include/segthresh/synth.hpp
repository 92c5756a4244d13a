#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "segthresh/types.hpp"

namespace segthresh {

/// Parameters of the synthetic nerve dataset. Masks are unions of elongated
/// ellipses; probability maps are blurred, noisy copies of the mask,
/// optionally reshaped so that a chosen threshold is Dice-optimal per image.
struct SynthSpec {
  std::uint64_t seed = 0;
  std::size_t width = 256;
  std::size_t height = 256;
  double presence_probability = 0.6;
  std::size_t min_blobs = 1;
  std::size_t max_blobs = 3;
  double min_radius = 8.0;   // semi-major axis, pixels
  double max_radius = 24.0;
  double min_aspect = 0.25;  // semi-minor / semi-major
  double max_aspect = 0.5;
  std::size_t blur_radius = 2;
  double noise_amplitude = 0.15;
  /// Threshold made per-image Dice-optimal; nullopt leaves maps uncompressed.
  std::optional<double> planted_threshold = 0.30;
  /// Half-width of the band around the plant that the optimal cut is squeezed into.
  double plant_band = 0.004;
  /// Grid spacing used to verify the plant.
  double plant_grid_step = 0.01;

  /// Throws std::invalid_argument on inconsistent ranges.
  void validate() const;
};

/// Deterministic in (spec.seed, index). Empty with probability 1 - presence.
BinaryMask gen_mask(const SynthSpec& spec, std::uint64_t index);

struct GeneratedMap {
  ProbabilityMap map;
  /// Set when the map was compressed around a planted threshold.
  std::optional<double> planted_threshold;
  /// Dice-best grid threshold found by the verification sweep.
  std::optional<double> verified_best;
};

/// Box blur, uniform noise, clamp, then (if planted) a monotone piecewise
/// linear remap that moves this image's Dice-optimal cut onto the plant.
/// The plant is re-checked by a brute-force grid sweep; throws
/// std::runtime_error if the best grid threshold is more than one step off.
GeneratedMap gen_probability_map(const BinaryMask& mask, const SynthSpec& spec, std::uint64_t index);

std::string synth_id(std::uint64_t index);

struct SynthSample {
  std::string id;
  BinaryMask mask;
  GeneratedMap generated;
};

SynthSample gen_sample(const SynthSpec& spec, std::uint64_t index);

/// Writes `count` samples under `out_dir` as pmaps/<id>.pmap, masks/<id>.png,
/// manifest.tsv (80:10:10 split seeded by spec.seed) and plant.txt.
/// Output bytes do not depend on `workers`.
void write_synth_dataset(const SynthSpec& spec, std::size_t count,
                         const std::filesystem::path& out_dir, int workers);

}  // namespace segthresh
