#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "segthresh/preprocess.hpp"
#include "segthresh/types.hpp"

namespace segthresh {

// PMAP v1 layout (little-endian throughout):
//   offset 0   4 bytes  magic "PMAP"
//   offset 4   1 byte   version 0x01
//   offset 5   u32      width
//   offset 9   u32      height
//   offset 13  f32 x width*height, row-major from the top-left pixel
inline constexpr std::size_t kPmapHeaderSize = 13;
inline constexpr std::uint8_t kPmapVersion = 1;

std::vector<std::uint8_t> encode_pmap(const ProbabilityMap& map);
/// Throws PmapParseError with the kind and byte offset of the first problem.
ProbabilityMap decode_pmap(std::span<const std::uint8_t> bytes);

void write_pmap(const ProbabilityMap& map, const std::filesystem::path& path);
ProbabilityMap read_pmap(const std::filesystem::path& path);

/// Any nonzero pixel is foreground. Only 8-bit single-channel files are
/// accepted (PNG, TIFF, PGM, ...); anything else is UnsupportedFormatError.
BinaryMask read_mask(const std::filesystem::path& path);
/// Writes 0/255 in the format implied by the extension (PNG if none).
void write_mask(const BinaryMask& mask, const std::filesystem::path& path);

/// Single-channel 8-bit, 16-bit or float image as raw intensities.
GrayImage read_gray_image(const std::filesystem::path& path);
/// Writes a [0, 1] image as 8-bit (values are clamped, then scaled by 255).
void write_gray_image(const GrayImage& img, const std::filesystem::path& path);

/// Writes to a sibling temp file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_file_atomic(const std::filesystem::path& path, std::string_view text);
std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

struct ManifestRecord {
  std::string id;
  std::filesystem::path pmap;  // relative to the dataset root
  std::filesystem::path mask;
  EvaluationTag tag;

  friend bool operator==(const ManifestRecord&, const ManifestRecord&) = default;
};

/// Tab-separated, one record per line: id, pmap path, mask path, split,
/// and an optional epoch. Lines starting with '#' are comments.
struct DatasetManifest {
  std::vector<ManifestRecord> records;

  /// Throws std::invalid_argument on duplicate ids and IoError when a
  /// referenced file is missing under `root`.
  void validate(const std::filesystem::path& root) const;
  std::vector<ManifestRecord> in_split(Split split) const;

  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

DatasetManifest read_manifest(const std::filesystem::path& path);
std::string format_manifest(const DatasetManifest& manifest);
void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

struct SplitCounts {
  std::size_t train = 0;
  std::size_t validation = 0;
  std::size_t test = 0;

  friend bool operator==(const SplitCounts&, const SplitCounts&) = default;
};

/// 80:10:10 with floor rounding and the remainder to train; when n >= 3 each
/// split gets at least one item, taken from train.
SplitCounts split_counts(std::size_t n);

/// Sorts ids, shuffles them with a stream seeded by `seed`, and cuts the
/// result train | validation | test. Returns (id, split) in sorted-id order,
/// so input order never matters. Throws EmptyDatasetError on an empty list
/// and std::invalid_argument on duplicate ids.
std::vector<std::pair<std::string, Split>> split_dataset(std::vector<std::string> ids,
                                                         std::uint64_t seed);

}  // namespace segthresh
