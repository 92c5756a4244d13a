#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace segthresh {

/// Two inputs that must share dimensions do not.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A dataset (or what remains of it after filtering) has no images.
class EmptyDatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File could not be opened, read, or written.
class IoError : public std::runtime_error {
 public:
  IoError(const std::string& path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// Image file is readable but not an 8-bit single-channel raster.
class UnsupportedFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed PMAP v1 stream. `offset` is the byte where the problem was found.
class PmapParseError : public std::runtime_error {
 public:
  enum class Kind { BadMagic, BadVersion, BadDimensions, PayloadLength, NaNValue, ValueOutOfRange };

  PmapParseError(Kind kind, std::size_t offset, const std::string& what);

  Kind kind() const noexcept { return kind_; }
  std::size_t offset() const noexcept { return offset_; }

 private:
  Kind kind_;
  std::size_t offset_;
};

/// Wraps a failure on one dataset item so callers see which image broke.
class ItemError : public std::runtime_error {
 public:
  ItemError(std::string id, const std::string& what)
      : std::runtime_error("image '" + id + "': " + what), id_(std::move(id)) {}
  const std::string& id() const noexcept { return id_; }

 private:
  std::string id_;
};

}  // namespace segthresh
