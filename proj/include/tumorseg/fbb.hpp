#pragma once

#include <optional>
#include <vector>

#include "tumorseg/image.hpp"

namespace tumorseg::fbb {

/// Gray-level histogram over [0, 256) with uniform bins. Raw bin weights are
/// kept alongside the total so that comparisons can be done exactly on
/// counts; probability(i) gives the normalised view.
class Histogram {
 public:
  Histogram() = default;
  explicit Histogram(int bin_count);
  static Histogram from_weights(std::vector<double> weights);

  int bin_count() const { return static_cast<int>(weights_.size()); }
  double weight(int bin) const { return weights_[bin]; }
  double total() const { return total_; }
  bool empty() const { return total_ == 0.0; }
  double probability(int bin) const { return weights_[bin] / total_; }
  std::vector<double> probabilities() const;

  static constexpr double kLow = 0.0;
  static constexpr double kHigh = 256.0;
  /// Bin index of an intensity; values at the top of the range fall in the
  /// last bin.
  static int bin_of(double intensity, int bin_count);

  void add(int bin, double weight = 1.0);

 private:
  std::vector<double> weights_;
  double total_ = 0.0;
};

/// Histogram of pixels inside both `region` and `mask`.
Histogram build_histogram(const GrayImage& image, const BinaryMask& mask,
                          const BoundingBox& region, int bin_count);

/// sum_i sqrt(p_i q_i) for two non-empty histograms with equal bin counts.
/// Identical histograms give exactly 1 and disjoint supports exactly 0.
double bhattacharyya(const Histogram& p, const Histogram& q);

/// Same coefficient on raw count vectors. Two empty operands compare as 1,
/// one empty operand as 0.
double bhattacharyya_counts(const double* p, const double* q, int bins);

enum class Side { Left, Right };

struct FbbParams {
  int bin_count = 16;
  double detection_threshold = 0.2;
  /// Fewest occupied rows (columns) a returned interval may span.
  int min_extent = 8;

  void validate() const;
};

struct FbbResult {
  std::optional<BoundingBox> box;
  Side side = Side::Right;
  double axis_col = 0.0;
  double inside_dissimilarity = 0.0;
  double score = 0.0;
  bool found = false;
};

/// Symmetry axis column (a multiple of 0.5) maximising the Bhattacharyya
/// coefficient between mirrored left and right halves of the mask, searched
/// within 10% of the raster width around the mask centroid.
double estimate_axis(const GrayImage& image, const BinaryMask& mask,
                     int bin_count = 16);

/// Maps column x through the axis: round(2 * axis - x).
int reflect_column(int col, double axis_col);

/// Fast bounding box search against the mirror image about `axis_col`.
/// Runs a vertical interval search followed by a horizontal one on each side
/// and keeps the side whose box is most dissimilar from its reflection.
FbbResult search_about_axis(const GrayImage& image, const BinaryMask& mask,
                            double axis_col, const FbbParams& params);

/// estimate_axis followed by search_about_axis.
FbbResult find_bounding_box(const GrayImage& image, const BinaryMask& mask,
                            const FbbParams& params = {});

}  // namespace tumorseg::fbb
