#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>

#include "tumorseg/image.hpp"

namespace tumorseg::phantom {

/// Axis-aligned ellipse sampled at pixel centres. Membership is evaluated
/// as dr^2 b^2 + dc^2 a^2 <= a^2 b^2, which is exact in double precision
/// for half-integer centres and semi-axes.
struct Ellipse {
  double center_row = 0.0;
  double center_col = 0.0;
  double semi_rows = 1.0;
  double semi_cols = 1.0;
  double intensity = 0.0;

  bool contains(int row, int col) const {
    const double dr = row - center_row;
    const double dc = col - center_col;
    const double a2 = semi_rows * semi_rows;
    const double b2 = semi_cols * semi_cols;
    return dr * dr * b2 + dc * dc * a2 <= a2 * b2;
  }
};

/// A mirror-symmetric head about head.center_col. `ventricle` is the left
/// member of the ventricle pair; its partner is mirrored automatically.
struct PhantomSpec {
  int width = 128;
  int height = 128;
  double background = 5.0;
  Ellipse head{63.5, 63.5, 50.0, 40.0, 120.0};
  Ellipse ventricle{72.0, 55.5, 10.0, 4.0, 60.0};
  std::optional<Ellipse> lesion;
  double noise_sigma = 8.0;
  std::uint64_t seed = 1;

  /// Throws Error naming the offending field.
  void validate() const;
};

struct Phantom {
  GrayImage image;
  BinaryMask head_truth;
  BinaryMask lesion_truth;
};

/// Fixed noise source: std::mt19937_64 (bit-exact by the standard) feeding
/// the Box-Muller transform, one normal deviate per pixel in raster order.
class NormalSource {
 public:
  explicit NormalSource(std::uint64_t seed);
  double uniform();  // [0, 1) with 53 random bits
  double next();     // standard normal

 private:
  std::mt19937_64 engine_;
};

Phantom generate(const PhantomSpec& spec);

/// 128x128 head, lesion ellipse centred (50, 80) with semi-axes (10, 10)
/// (rows 40-60, cols 70-90), intensity 200, noise sigma 8.
PhantomSpec standard_lesion_spec(std::uint64_t seed = 1);

/// The standard head without a lesion.
PhantomSpec symmetric_spec(std::uint64_t seed = 1);

/// Standard head with a seed-derived lesion: side, centre, semi-axes in
/// [6, 13] and intensity in [170, 230], always inside one half of the head.
PhantomSpec random_lesion_spec(std::uint64_t seed);

/// Tight bounding box of a non-empty mask.
BoundingBox mask_bounds(const BinaryMask& mask);

std::string spec_to_json(const PhantomSpec& spec);
/// Unknown keys are rejected; absent keys keep the defaults above.
PhantomSpec spec_from_json(const std::string& text);

}  // namespace tumorseg::phantom
