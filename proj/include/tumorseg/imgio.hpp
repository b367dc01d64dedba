#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "tumorseg/image.hpp"

namespace tumorseg::imgio {

enum class PgmErrorKind {
  MissingFile,
  UnsupportedVariant,
  MalformedHeader,
  UnsupportedMaxval,
  Truncated,
  Unwritable,
  OutOfRange,
};

class PgmError : public Error {
 public:
  PgmError(PgmErrorKind kind, const std::string& what)
      : Error(what), kind_(kind) {}
  PgmErrorKind kind() const { return kind_; }

 private:
  PgmErrorKind kind_;
};

/// Reads a binary 8-bit PGM (P5, maxval 255). Header comments are skipped.
GrayImage load_gray_pgm(const std::filesystem::path& path);
GrayImage decode_gray_pgm(const std::string& bytes);

/// Rounds each intensity to the nearest integer (ties away from zero).
/// Throws PgmError(OutOfRange) naming the first pixel outside [0, 255].
std::string encode_gray_pgm(const GrayImage& image);
void write_gray_pgm(const GrayImage& image, const std::filesystem::path& path);

/// true -> 255, false -> 0.
std::string encode_mask_pgm(const BinaryMask& mask);
void write_mask_pgm(const BinaryMask& mask, const std::filesystem::path& path);

/// Loads a PGM and thresholds it: value >= 128 -> true.
BinaryMask load_mask_pgm(const std::filesystem::path& path);
BinaryMask threshold_mask(const GrayImage& image, double level = 128.0);

/// Mask pixels with at least one 4-neighbour outside the mask. Pixels on the
/// raster border count as touching the outside.
BinaryMask mask_boundary(const BinaryMask& mask);

/// Copy of `image` with the mask boundary and the box edges painted 255.
GrayImage render_overlay(const GrayImage& image, const BinaryMask& mask,
                         const std::optional<BoundingBox>& box);

}  // namespace tumorseg::imgio
