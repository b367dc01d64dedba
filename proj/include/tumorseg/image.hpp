#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tumorseg {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Row-major raster of real intensities, origin at the top-left pixel.
/// Intensities are kept real-valued; quantization happens only on write.
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int width, int height, double fill = 0.0);
  GrayImage(int width, int height, std::vector<double> pixels);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return pixels_.size(); }
  bool empty() const { return pixels_.empty(); }

  double at(int row, int col) const { return pixels_[index(row, col)]; }
  double& at(int row, int col) { return pixels_[index(row, col)]; }
  double operator[](std::size_t i) const { return pixels_[i]; }
  double& operator[](std::size_t i) { return pixels_[i]; }

  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(col);
  }
  bool contains(int row, int col) const {
    return row >= 0 && row < height_ && col >= 0 && col < width_;
  }

  std::span<const double> pixels() const { return pixels_; }
  std::span<double> pixels() { return pixels_; }

  /// Copy with columns reversed (left/right mirror).
  GrayImage mirrored() const;

  bool operator==(const GrayImage&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> pixels_;
};

/// Row-major per-pixel boolean raster.
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int width, int height, bool fill = false);
  BinaryMask(int width, int height, std::vector<bool> bits);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return bits_.size(); }

  bool at(int row, int col) const { return bits_[index(row, col)]; }
  void set(int row, int col, bool value) { bits_[index(row, col)] = value; }
  bool operator[](std::size_t i) const { return bits_[i]; }
  void set(std::size_t i, bool value) { bits_[i] = value; }

  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(col);
  }
  bool contains(int row, int col) const {
    return row >= 0 && row < height_ && col >= 0 && col < width_;
  }

  std::size_t count() const;
  bool any() const { return count() > 0; }
  BinaryMask mirrored() const;

  template <typename Image>
  bool same_shape(const Image& other) const {
    return width_ == other.width() && height_ == other.height();
  }

  bool operator==(const BinaryMask&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<bool> bits_;
};

/// Inclusive axis-aligned rectangle in (row, col) coordinates.
struct BoundingBox {
  int row_min = 0;
  int row_max = 0;
  int col_min = 0;
  int col_max = 0;

  int rows() const { return row_max - row_min + 1; }
  int cols() const { return col_max - col_min + 1; }
  long long area() const { return static_cast<long long>(rows()) * cols(); }
  bool contains(int row, int col) const {
    return row >= row_min && row <= row_max && col >= col_min && col <= col_max;
  }
  bool valid_in(int width, int height) const {
    return row_min >= 0 && col_min >= 0 && row_min <= row_max &&
           col_min <= col_max && row_max < height && col_max < width;
  }
  /// The box reflected through the vertical center line of a raster.
  BoundingBox mirrored(int width) const {
    return {row_min, row_max, width - 1 - col_max, width - 1 - col_min};
  }

  bool operator==(const BoundingBox&) const = default;
};

double intersection_over_union(const BoundingBox& a, const BoundingBox& b);

/// Throws unless both rasters share dimensions.
template <typename A, typename B>
void require_same_shape(const A& a, const B& b, const char* what) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw Error(std::string(what) + ": dimension mismatch (" +
                std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                " vs " + std::to_string(b.width()) + "x" +
                std::to_string(b.height()) + ")");
  }
}

}  // namespace tumorseg
