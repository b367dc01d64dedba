#pragma once

#include "tumorseg/image.hpp"

namespace tumorseg::preprocess {

enum class Conduction { Exponential, Rational };
enum class Neighborhood { Four = 4, Eight = 8 };

struct DiffusionParams {
  double lambda = 0.125;
  double k = 8.0;
  int iterations = 10;
  Conduction function = Conduction::Exponential;
  // Four drops the diagonal terms; kept for comparison runs.
  Neighborhood neighborhood = Neighborhood::Eight;

  /// Throws Error when lambda is outside (0, 0.125], k <= 0 or
  /// iterations < 1.
  void validate() const;
};

struct HeadMaskResult {
  BinaryMask mask;
  int threshold = 0;
  GrayImage stripped;
};

/// Otsu's threshold on the 256-bin histogram of rounded intensities.
/// Returns the lowest t maximising between-class variance of the split
/// {bin <= t} / {bin > t}; both classes are nonempty. Comparisons are exact
/// (integer arithmetic), so ties resolve deterministically.
int otsu_threshold(const GrayImage& image);

/// Histogram bin (0..255) of an intensity, as used by otsu_threshold.
int intensity_bin(double value);

/// Largest 8-connected true component. Equal sizes resolve to the component
/// whose first pixel in raster order comes first.
BinaryMask largest_component(const BinaryMask& mask);

/// Sets every false pixel not 4-connected to the raster border.
BinaryMask fill_holes(const BinaryMask& mask);

HeadMaskResult skull_strip(const GrayImage& image);

double conduction(double gradient_magnitude, double k, Conduction function);

/// Perona-Malik diffusion over the 8-connected (or 4-connected)
/// neighbourhood. All differences and conduction coefficients are taken at
/// the centre pixel from the previous iterate; out-of-range neighbours
/// replicate the centre.
GrayImage diffuse(const GrayImage& image, const DiffusionParams& params);

}  // namespace tumorseg::preprocess
