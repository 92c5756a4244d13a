#include "segthresh/dataset_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>
#include <stdexcept>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "segthresh/errors.hpp"
#include "segthresh/rng.hpp"

namespace segthresh {

namespace fs = std::filesystem;

namespace {

constexpr std::uint8_t kMagic[4] = {'P', 'M', 'A', 'P'};

std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[offset + i]) << (8 * i);
  return v;
}

std::string extension_or_png(const fs::path& path) {
  const std::string ext = path.extension().string();
  return ext.empty() ? std::string(".png") : ext;
}

cv::Mat read_unchanged(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw IoError(path.string(), "no such file");
  cv::Mat img = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  if (img.empty()) throw UnsupportedFormatError(path.string() + ": not a readable image");
  return img;
}

void write_encoded(const cv::Mat& img, const fs::path& path) {
  std::vector<std::uint8_t> buffer;
  try {
    if (!cv::imencode(extension_or_png(path), img, buffer)) {
      throw IoError(path.string(), "image encoding failed");
    }
  } catch (const cv::Exception& e) {
    throw UnsupportedFormatError(path.string() + ": " + e.what());
  }
  write_file_atomic(path, buffer);
}

}  // namespace

std::vector<std::uint8_t> encode_pmap(const ProbabilityMap& map) {
  std::vector<std::uint8_t> out(kPmapHeaderSize + 4 * map.size());
  std::copy(std::begin(kMagic), std::end(kMagic), out.begin());
  out[4] = kPmapVersion;
  std::size_t at = 5;
  const auto put = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out[at++] = static_cast<std::uint8_t>(v >> (8 * i));
  };
  put(static_cast<std::uint32_t>(map.width()));
  put(static_cast<std::uint32_t>(map.height()));
  for (const float v : map.values()) put(std::bit_cast<std::uint32_t>(v));
  return out;
}

ProbabilityMap decode_pmap(std::span<const std::uint8_t> bytes) {
  using Kind = PmapParseError::Kind;
  for (std::size_t i = 0; i < 4; ++i) {
    if (i >= bytes.size() || bytes[i] != kMagic[i]) {
      throw PmapParseError(Kind::BadMagic, i, "expected magic 'PMAP'");
    }
  }
  if (bytes.size() < 5) throw PmapParseError(Kind::PayloadLength, bytes.size(), "missing version byte");
  if (bytes[4] != kPmapVersion) {
    throw PmapParseError(Kind::BadVersion, 4, "unsupported version " + std::to_string(bytes[4]));
  }
  if (bytes.size() < kPmapHeaderSize) {
    throw PmapParseError(Kind::PayloadLength, bytes.size(), "header truncated");
  }
  const std::uint32_t width = get_u32(bytes, 5);
  const std::uint32_t height = get_u32(bytes, 9);
  if (width == 0) throw PmapParseError(Kind::BadDimensions, 5, "width is zero");
  if (height == 0) throw PmapParseError(Kind::BadDimensions, 9, "height is zero");

  const std::uint64_t count = static_cast<std::uint64_t>(width) * height;
  const std::uint64_t expected = kPmapHeaderSize + 4 * count;
  if (bytes.size() != expected) {
    const std::size_t where = bytes.size() < expected ? bytes.size() : static_cast<std::size_t>(expected);
    throw PmapParseError(Kind::PayloadLength, where,
                         "payload is " + std::to_string(bytes.size() - kPmapHeaderSize) +
                             " bytes, " + std::to_string(width) + "x" + std::to_string(height) +
                             " needs " + std::to_string(4 * count));
  }

  std::vector<float> values(static_cast<std::size_t>(count));
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::size_t offset = kPmapHeaderSize + 4 * i;
    const float v = std::bit_cast<float>(get_u32(bytes, offset));
    if (std::isnan(v)) throw PmapParseError(Kind::NaNValue, offset, "NaN probability");
    if (!(v >= 0.0f && v <= 1.0f)) {
      throw PmapParseError(Kind::ValueOutOfRange, offset,
                           "probability " + std::to_string(v) + " outside [0, 1]");
    }
    values[i] = v;
  }
  return ProbabilityMap(width, height, std::move(values));
}

void write_pmap(const ProbabilityMap& map, const fs::path& path) {
  write_file_atomic(path, encode_pmap(map));
}

ProbabilityMap read_pmap(const fs::path& path) {
  const auto bytes = read_file(path);
  try {
    return decode_pmap(bytes);
  } catch (const PmapParseError& e) {
    throw PmapParseError(e.kind(), e.offset(), path.string() + ": " + e.what());
  }
}

BinaryMask read_mask(const fs::path& path) {
  const cv::Mat img = read_unchanged(path);
  if (img.channels() != 1 || img.depth() != CV_8U) {
    throw UnsupportedFormatError(path.string() + ": masks must be 8-bit single-channel (got " +
                                 std::to_string(img.channels()) + " channel(s), depth " +
                                 std::to_string(img.depth()) + ")");
  }
  const auto w = static_cast<std::size_t>(img.cols);
  const auto h = static_cast<std::size_t>(img.rows);
  std::vector<std::uint8_t> values(w * h);
  for (int y = 0; y < img.rows; ++y) {
    const auto* row = img.ptr<std::uint8_t>(y);
    for (int x = 0; x < img.cols; ++x) {
      values[static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x)] = row[x] != 0 ? 1 : 0;
    }
  }
  return BinaryMask(w, h, std::move(values));
}

void write_mask(const BinaryMask& mask, const fs::path& path) {
  cv::Mat img(static_cast<int>(mask.height()), static_cast<int>(mask.width()), CV_8UC1);
  for (int y = 0; y < img.rows; ++y) {
    auto* row = img.ptr<std::uint8_t>(y);
    for (int x = 0; x < img.cols; ++x) {
      row[x] = mask.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) ? 255 : 0;
    }
  }
  write_encoded(img, path);
}

GrayImage read_gray_image(const fs::path& path) {
  const cv::Mat img = read_unchanged(path);
  if (img.channels() != 1) {
    throw UnsupportedFormatError(path.string() + ": expected a single-channel image, got " +
                                 std::to_string(img.channels()) + " channels");
  }
  cv::Mat as_double;
  img.convertTo(as_double, CV_64F);
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(img.rows) * static_cast<std::size_t>(img.cols));
  for (int y = 0; y < as_double.rows; ++y) {
    const auto* row = as_double.ptr<double>(y);
    values.insert(values.end(), row, row + as_double.cols);
  }
  return GrayImage(static_cast<std::size_t>(img.cols), static_cast<std::size_t>(img.rows),
                   std::move(values));
}

void write_gray_image(const GrayImage& img, const fs::path& path) {
  cv::Mat out(static_cast<int>(img.height()), static_cast<int>(img.width()), CV_8UC1);
  for (int y = 0; y < out.rows; ++y) {
    auto* row = out.ptr<std::uint8_t>(y);
    for (int x = 0; x < out.cols; ++x) {
      const double v = std::clamp(img.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y)), 0.0, 1.0);
      row[x] = static_cast<std::uint8_t>(std::lround(v * 255.0));
    }
  }
  write_encoded(out, path);
}

void write_file_atomic(const fs::path& path, std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(tmp.string(), "cannot open for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
      out.close();
      fs::remove(tmp);
      throw IoError(tmp.string(), "write failed");
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw IoError(path.string(), "rename failed: " + ec.message());
  }
}

void write_file_atomic(const fs::path& path, std::string_view text) {
  write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::vector<std::uint8_t> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open for reading");
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void DatasetManifest::validate(const fs::path& root) const {
  std::set<std::string> seen;
  for (const auto& r : records) {
    if (!seen.insert(r.id).second) {
      throw std::invalid_argument("manifest: duplicate image id '" + r.id + "'");
    }
    for (const auto& p : {r.pmap, r.mask}) {
      if (!fs::is_regular_file(root / p)) throw IoError((root / p).string(), "referenced file is missing");
    }
  }
}

std::vector<ManifestRecord> DatasetManifest::in_split(Split split) const {
  std::vector<ManifestRecord> out;
  std::copy_if(records.begin(), records.end(), std::back_inserter(out),
               [split](const ManifestRecord& r) { return r.tag.split == split; });
  return out;
}

DatasetManifest read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string(), "cannot open manifest");
  DatasetManifest manifest;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, '\t')) fields.push_back(field);
    if (fields.size() < 4 || fields.size() > 5) {
      throw std::invalid_argument(path.string() + ":" + std::to_string(line_no) +
                                  ": expected 4 or 5 tab-separated fields");
    }
    ManifestRecord r{fields[0], fields[1], fields[2], {}};
    try {
      r.tag.split = parse_split(fields[3]);
      if (fields.size() == 5 && !fields[4].empty()) {
        r.tag.epoch = static_cast<std::uint32_t>(std::stoul(fields[4]));
      }
    } catch (const std::exception& e) {
      throw std::invalid_argument(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    manifest.records.push_back(std::move(r));
  }
  return manifest;
}

std::string format_manifest(const DatasetManifest& manifest) {
  std::string out = "# id\tpmap\tmask\tsplit\tepoch\n";
  for (const auto& r : manifest.records) {
    out += r.id + '\t' + r.pmap.generic_string() + '\t' + r.mask.generic_string() + '\t' +
           std::string(to_string(r.tag.split));
    if (r.tag.epoch) out += '\t' + std::to_string(*r.tag.epoch);
    out += '\n';
  }
  return out;
}

void write_manifest(const DatasetManifest& manifest, const fs::path& path) {
  write_file_atomic(path, format_manifest(manifest));
}

SplitCounts split_counts(std::size_t n) {
  SplitCounts c;
  c.validation = n / 10;
  c.test = n / 10;
  c.train = n - c.validation - c.test;
  if (n >= 3) {
    for (std::size_t* part : {&c.validation, &c.test}) {
      if (*part == 0) {
        *part = 1;
        --c.train;
      }
    }
  }
  return c;
}

std::vector<std::pair<std::string, Split>> split_dataset(std::vector<std::string> ids, std::uint64_t seed) {
  if (ids.empty()) throw EmptyDatasetError("split_dataset: no ids to split");
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
    throw std::invalid_argument("split_dataset: duplicate ids");
  }

  std::vector<std::size_t> order(ids.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  RandomStream rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[rng.below(i)]);
  }

  const SplitCounts counts = split_counts(ids.size());
  std::vector<std::pair<std::string, Split>> out(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) out[i].first = ids[i];
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    Split s = Split::Test;
    if (rank < counts.train) {
      s = Split::Train;
    } else if (rank < counts.train + counts.validation) {
      s = Split::Validation;
    }
    out[order[rank]].second = s;
  }
  return out;
}

}  // namespace segthresh
