#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tumorseg/fbb.hpp"
#include "tumorseg/image.hpp"
#include "tumorseg/ocsvm.hpp"
#include "tumorseg/preprocess.hpp"

namespace tumorseg::pipeline {

struct PipelineConfig {
  preprocess::DiffusionParams diffusion;
  fbb::FbbParams fbb;
  double central_fraction = 0.5;
  int patch_size = 3;
  ocsvm::TrainConfig train;
  /// Keep only the largest 8-connected component of the output.
  bool cleanup = false;
  /// Worker threads for pixel classification. Results do not depend on it.
  int jobs = 1;

  void validate() const;
};

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
};

struct MetricsReport {
  ConfusionCounts counts;
  double accuracy = 1.0;
  double si = 1.0;
};

struct SegmentResult {
  BinaryMask mask;
  fbb::FbbResult detection;
  std::optional<ocsvm::OcsvmModel> model;
  BinaryMask head_mask;
  GrayImage denoised;
};

/// Box centred on `box` whose half-extent per axis is
/// floor(fraction / 2 * extent). Never empty.
BoundingBox central_region(const BoundingBox& box, double fraction);

/// patch_size x patch_size intensities around (row, col), replicated at the
/// borders, scaled by 1/255, row-major.
ocsvm::FeatureVector patch_features(const GrayImage& image, int row, int col,
                                    int patch_size);

/// One feature vector per in-mask pixel of `region`, in raster order.
std::vector<ocsvm::FeatureVector> extract_features(const GrayImage& image,
                                                   const BinaryMask& mask,
                                                   const BoundingBox& region,
                                                   int patch_size);

/// Skull strip, diffuse, locate the box, train on its central region and
/// classify every head pixel.
SegmentResult segment(const GrayImage& image, const PipelineConfig& config);

/// Confusion counts over the pixels where `domain` is true.
MetricsReport evaluate(const BinaryMask& predicted, const BinaryMask& truth,
                       const BinaryMask& domain);
MetricsReport metrics_from_counts(const ConfusionCounts& counts);

/// {tp, fp, fn, tn, accuracy, si}; ratios rounded to 6 decimals.
std::string metrics_to_json(const MetricsReport& report);

}  // namespace tumorseg::pipeline
