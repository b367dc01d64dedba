#include "tumorseg/preprocess.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>

namespace tumorseg::preprocess {

namespace {

using u128 = unsigned __int128;
using i128 = __int128;

// Between-class variance scaled by N^2 is a^2 / b with
// a = s0*N - S*n0 and b = n0*n1. Stored as quotient and remainder so two
// candidates can be compared without overflow.
struct ScaledVariance {
  u128 quotient = 0;
  u128 remainder = 0;
  u128 denominator = 1;

  bool greater_than(const ScaledVariance& other) const {
    if (quotient != other.quotient) return quotient > other.quotient;
    return remainder * other.denominator > other.remainder * denominator;
  }
};

ScaledVariance scaled_variance(std::uint64_t n0, std::uint64_t s0,
                               std::uint64_t total, std::uint64_t sum) {
  const i128 a = static_cast<i128>(s0) * total - static_cast<i128>(sum) * n0;
  const u128 mag = static_cast<u128>(a < 0 ? -a : a);
  const u128 square = mag * mag;
  const u128 b = static_cast<u128>(n0) * (total - n0);
  return {square / b, square % b, b};
}

}  // namespace

void DiffusionParams::validate() const {
  if (!(lambda > 0.0 && lambda <= 0.125)) {
    throw Error("diffusion lambda must lie in (0, 0.125], got " +
                std::to_string(lambda));
  }
  if (!(k > 0.0) || !std::isfinite(k)) {
    throw Error("diffusion k must be positive and finite");
  }
  if (iterations < 1) {
    throw Error("diffusion iterations must be >= 1");
  }
  if (neighborhood != Neighborhood::Four && neighborhood != Neighborhood::Eight) {
    throw Error("diffusion neighborhood must be 4 or 8");
  }
}

int intensity_bin(double value) {
  if (!(value >= 0.0 && value <= 255.0)) {
    throw Error("intensity outside [0,255]: " + std::to_string(value));
  }
  return static_cast<int>(std::round(value));
}

int otsu_threshold(const GrayImage& image) {
  if (image.empty()) throw Error("otsu_threshold: empty image");
  // a^2 must fit in 128 bits: a <= 255 * N^2 < 2^64.
  if (image.size() >= (std::size_t{1} << 28)) {
    throw Error("otsu_threshold: image too large");
  }
  std::array<std::uint64_t, 256> hist{};
  for (const double v : image.pixels()) ++hist[intensity_bin(v)];

  int lo = 0;
  while (hist[lo] == 0) ++lo;
  int hi = 255;
  while (hist[hi] == 0) --hi;
  if (lo == hi) throw Error("degenerate histogram: constant image");

  const std::uint64_t total = image.size();
  std::uint64_t sum = 0;
  for (int i = 0; i < 256; ++i) sum += static_cast<std::uint64_t>(i) * hist[i];

  std::uint64_t n0 = 0;
  std::uint64_t s0 = 0;
  int best = -1;
  ScaledVariance best_var;
  for (int t = 0; t < hi; ++t) {
    n0 += hist[t];
    s0 += static_cast<std::uint64_t>(t) * hist[t];
    if (t < lo) continue;
    const ScaledVariance var = scaled_variance(n0, s0, total, sum);
    if (best < 0 || var.greater_than(best_var)) {
      best = t;
      best_var = var;
    }
  }
  return best;
}

BinaryMask largest_component(const BinaryMask& mask) {
  const int w = mask.width();
  const int h = mask.height();
  std::vector<int> label(mask.size(), -1);
  std::vector<std::size_t> sizes;
  std::deque<std::pair<int, int>> queue;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (!mask.at(r, c) || label[mask.index(r, c)] >= 0) continue;
      const int id = static_cast<int>(sizes.size());
      std::size_t size = 0;
      label[mask.index(r, c)] = id;
      queue.emplace_back(r, c);
      while (!queue.empty()) {
        const auto [cr, cc] = queue.front();
        queue.pop_front();
        ++size;
        for (int dr = -1; dr <= 1; ++dr) {
          for (int dc = -1; dc <= 1; ++dc) {
            const int nr = cr + dr;
            const int nc = cc + dc;
            if ((dr == 0 && dc == 0) || !mask.contains(nr, nc)) continue;
            const std::size_t idx = mask.index(nr, nc);
            if (mask[idx] && label[idx] < 0) {
              label[idx] = id;
              queue.emplace_back(nr, nc);
            }
          }
        }
      }
      sizes.push_back(size);
    }
  }
  BinaryMask out(w, h);
  if (sizes.empty()) return out;
  int best = 0;
  for (int i = 1; i < static_cast<int>(sizes.size()); ++i) {
    if (sizes[i] > sizes[best]) best = i;
  }
  for (std::size_t i = 0; i < label.size(); ++i) {
    out.set(i, label[i] == best);
  }
  return out;
}

BinaryMask fill_holes(const BinaryMask& mask) {
  const int w = mask.width();
  const int h = mask.height();
  std::vector<bool> outside(mask.size(), false);
  std::deque<std::pair<int, int>> queue;
  auto seed = [&](int r, int c) {
    const std::size_t idx = mask.index(r, c);
    if (!mask[idx] && !outside[idx]) {
      outside[idx] = true;
      queue.emplace_back(r, c);
    }
  };
  for (int c = 0; c < w; ++c) {
    seed(0, c);
    seed(h - 1, c);
  }
  for (int r = 0; r < h; ++r) {
    seed(r, 0);
    seed(r, w - 1);
  }
  constexpr int kDr[4] = {-1, 1, 0, 0};
  constexpr int kDc[4] = {0, 0, -1, 1};
  while (!queue.empty()) {
    const auto [r, c] = queue.front();
    queue.pop_front();
    for (int d = 0; d < 4; ++d) {
      const int nr = r + kDr[d];
      const int nc = c + kDc[d];
      if (mask.contains(nr, nc)) seed(nr, nc);
    }
  }
  BinaryMask out(w, h);
  for (std::size_t i = 0; i < out.size(); ++i) out.set(i, !outside[i]);
  return out;
}

HeadMaskResult skull_strip(const GrayImage& image) {
  if (image.empty()) throw Error("skull_strip: empty image");
  HeadMaskResult result;
  result.threshold = otsu_threshold(image);

  BinaryMask foreground(image.width(), image.height());
  for (std::size_t i = 0; i < image.size(); ++i) {
    foreground.set(i, intensity_bin(image[i]) > result.threshold);
  }
  result.mask = fill_holes(largest_component(foreground));
  if (!result.mask.any()) throw Error("no head region found");

  result.stripped = image;
  for (std::size_t i = 0; i < image.size(); ++i) {
    if (!result.mask[i]) result.stripped[i] = 0.0;
  }
  return result;
}

double conduction(double gradient_magnitude, double k, Conduction function) {
  const double ratio = gradient_magnitude / k;
  const double sq = ratio * ratio;
  return function == Conduction::Exponential ? std::exp(-sq) : 1.0 / (1.0 + sq);
}

GrayImage diffuse(const GrayImage& image, const DiffusionParams& params) {
  params.validate();
  if (image.empty()) throw Error("diffuse: empty image");

  const int w = image.width();
  const int h = image.height();
  const bool diagonals = params.neighborhood == Neighborhood::Eight;
  GrayImage current = image;
  GrayImage next = image;

  for (int it = 0; it < params.iterations; ++it) {
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        const double centre = current.at(r, c);
        double lo = centre;
        double hi = centre;
        auto term = [&](int dr, int dc) {
          const int nr = r + dr;
          const int nc = c + dc;
          if (!current.contains(nr, nc)) return 0.0;
          const double v = current.at(nr, nc);
          lo = std::min(lo, v);
          hi = std::max(hi, v);
          const double grad = v - centre;
          return conduction(std::abs(grad), params.k, params.function) * grad;
        };
        // Pairs are summed as (left + right) so that mirrored inputs give
        // bit-identical results.
        double flux = (term(0, -1) + term(0, 1)) + (term(-1, 0) + term(1, 0));
        if (diagonals) {
          flux += (term(-1, -1) + term(-1, 1)) + (term(1, -1) + term(1, 1));
        }
        // The update is a convex combination of the centre and its
        // neighbours; clamping only removes rounding overshoot.
        next.at(r, c) = std::clamp(centre + params.lambda * flux, lo, hi);
      }
    }
    std::swap(current, next);
  }
  return current;
}

}  // namespace tumorseg::preprocess
