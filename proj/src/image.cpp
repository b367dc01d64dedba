#include "tumorseg/image.hpp"

#include <algorithm>
#include <cmath>

namespace tumorseg {

namespace {

void check_dims(int width, int height) {
  if (width <= 0 || height <= 0) {
    throw Error("raster dimensions must be positive, got " +
                std::to_string(width) + "x" + std::to_string(height));
  }
}

}  // namespace

GrayImage::GrayImage(int width, int height, double fill)
    : width_(width), height_(height) {
  check_dims(width, height);
  pixels_.assign(static_cast<std::size_t>(width) * height, fill);
}

GrayImage::GrayImage(int width, int height, std::vector<double> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  check_dims(width, height);
  if (pixels_.size() != static_cast<std::size_t>(width) * height) {
    throw Error("pixel count " + std::to_string(pixels_.size()) +
                " does not match " + std::to_string(width) + "x" +
                std::to_string(height));
  }
  for (std::size_t i = 0; i < pixels_.size(); ++i) {
    if (!std::isfinite(pixels_[i])) {
      throw Error("non-finite intensity at pixel " + std::to_string(i));
    }
  }
}

GrayImage GrayImage::mirrored() const {
  GrayImage out = *this;
  for (int r = 0; r < height_; ++r) {
    for (int c = 0; c < width_; ++c) {
      out.at(r, c) = at(r, width_ - 1 - c);
    }
  }
  return out;
}

BinaryMask::BinaryMask(int width, int height, bool fill)
    : width_(width), height_(height) {
  check_dims(width, height);
  bits_.assign(static_cast<std::size_t>(width) * height, fill);
}

BinaryMask::BinaryMask(int width, int height, std::vector<bool> bits)
    : width_(width), height_(height), bits_(std::move(bits)) {
  check_dims(width, height);
  if (bits_.size() != static_cast<std::size_t>(width) * height) {
    throw Error("mask bit count " + std::to_string(bits_.size()) +
                " does not match " + std::to_string(width) + "x" +
                std::to_string(height));
  }
}

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), true));
}

BinaryMask BinaryMask::mirrored() const {
  BinaryMask out = *this;
  for (int r = 0; r < height_; ++r) {
    for (int c = 0; c < width_; ++c) {
      out.set(r, c, at(r, width_ - 1 - c));
    }
  }
  return out;
}

double intersection_over_union(const BoundingBox& a, const BoundingBox& b) {
  const int r0 = std::max(a.row_min, b.row_min);
  const int r1 = std::min(a.row_max, b.row_max);
  const int c0 = std::max(a.col_min, b.col_min);
  const int c1 = std::min(a.col_max, b.col_max);
  long long inter = 0;
  if (r0 <= r1 && c0 <= c1) {
    inter = static_cast<long long>(r1 - r0 + 1) * (c1 - c0 + 1);
  }
  const long long uni = a.area() + b.area() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace tumorseg
