#pragma once

#include <cstdint>
#include <random>

namespace segthresh {

/// Seeded stream with draws defined in terms of raw mt19937_64 output, so the
/// sequence is identical across standard libraries (the std distributions
/// are implementation-defined).
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  /// Independent stream for item `index` under `seed`; lets per-item work
  /// run in any order.
  static RandomStream substream(std::uint64_t seed, std::uint64_t index);

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  bool bernoulli(double p) { return uniform01() < p; }
  /// Uniform integer in [0, bound) by rejection; bound must be positive.
  std::uint64_t below(std::uint64_t bound);

 private:
  std::mt19937_64 engine_;
};

/// SplitMix64 finalizer; used to derive substream seeds.
std::uint64_t mix64(std::uint64_t x) noexcept;

}  // namespace segthresh
