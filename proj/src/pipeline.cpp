#include "tumorseg/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "json.hpp"

namespace tumorseg::pipeline {

namespace {

double round6(double v) { return std::round(v * 1e6) / 1e6; }

void require_patch_size(int patch_size) {
  if (patch_size != 1 && patch_size != 3 && patch_size != 5) {
    throw Error("patch_size must be 1, 3 or 5, got " + std::to_string(patch_size));
  }
}

// Splits [0, rows) into contiguous chunks, one per worker.
template <typename Fn>
void parallel_rows(int rows, int jobs, Fn&& fn) {
  jobs = std::clamp(jobs, 1, std::max(rows, 1));
  if (jobs == 1) {
    fn(0, rows);
    return;
  }
  std::vector<std::thread> workers;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(jobs));
  const int chunk = (rows + jobs - 1) / jobs;
  for (int t = 0; t < jobs; ++t) {
    const int lo = t * chunk;
    const int hi = std::min(rows, lo + chunk);
    workers.emplace_back([&, t, lo, hi] {
      try {
        if (lo < hi) fn(lo, hi);
      } catch (...) {
        errors[static_cast<std::size_t>(t)] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

void PipelineConfig::validate() const {
  diffusion.validate();
  fbb.validate();
  train.validate();
  if (!(central_fraction > 0.0 && central_fraction <= 1.0)) {
    throw Error("central_fraction must lie in (0, 1]");
  }
  require_patch_size(patch_size);
  if (jobs < 1) throw Error("jobs must be >= 1");
}

BoundingBox central_region(const BoundingBox& box, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw Error("central_region: fraction must lie in (0, 1]");
  }
  // Work in doubled coordinates so even extents stay centred.
  auto shrink = [fraction](int lo, int hi, int& out_lo, int& out_hi) {
    const int extent = hi - lo + 1;
    const int half = static_cast<int>(std::floor(fraction / 2.0 * extent));
    const int twice_centre = lo + hi;
    out_lo = (twice_centre - 2 * half + 1) / 2;  // ceil for non-negative
    out_hi = (twice_centre + 2 * half) / 2;      // floor
    if (out_lo > out_hi) out_lo = out_hi = twice_centre / 2;
  };
  BoundingBox out;
  shrink(box.row_min, box.row_max, out.row_min, out.row_max);
  shrink(box.col_min, box.col_max, out.col_min, out.col_max);
  return out;
}

ocsvm::FeatureVector patch_features(const GrayImage& image, int row, int col,
                                    int patch_size) {
  require_patch_size(patch_size);
  const int radius = patch_size / 2;
  ocsvm::FeatureVector v;
  v.reserve(static_cast<std::size_t>(patch_size) * patch_size);
  for (int dr = -radius; dr <= radius; ++dr) {
    const int r = std::clamp(row + dr, 0, image.height() - 1);
    for (int dc = -radius; dc <= radius; ++dc) {
      const int c = std::clamp(col + dc, 0, image.width() - 1);
      v.push_back(image.at(r, c) / 255.0);
    }
  }
  return v;
}

std::vector<ocsvm::FeatureVector> extract_features(const GrayImage& image,
                                                   const BinaryMask& mask,
                                                   const BoundingBox& region,
                                                   int patch_size) {
  require_same_shape(image, mask, "extract_features");
  require_patch_size(patch_size);
  if (!region.valid_in(image.width(), image.height())) {
    throw Error("extract_features: region outside raster");
  }
  std::vector<ocsvm::FeatureVector> out;
  for (int r = region.row_min; r <= region.row_max; ++r) {
    for (int c = region.col_min; c <= region.col_max; ++c) {
      if (mask.at(r, c)) out.push_back(patch_features(image, r, c, patch_size));
    }
  }
  return out;
}

SegmentResult segment(const GrayImage& image, const PipelineConfig& config) {
  config.validate();
  SegmentResult result;
  const preprocess::HeadMaskResult head = preprocess::skull_strip(image);
  result.head_mask = head.mask;
  result.denoised = preprocess::diffuse(head.stripped, config.diffusion);
  result.detection = fbb::find_bounding_box(result.denoised, head.mask, config.fbb);
  result.mask = BinaryMask(image.width(), image.height());
  if (!result.detection.found) return result;

  const BoundingBox& box = *result.detection.box;
  auto samples = extract_features(result.denoised, head.mask,
                                  central_region(box, config.central_fraction),
                                  config.patch_size);
  // A box hugging a concave head outline can have its centre outside the head.
  if (samples.empty()) {
    samples = extract_features(result.denoised, head.mask, box, config.patch_size);
  }
  if (samples.empty()) throw Error("segment: no training samples in the bounding box");
  // Kernel width from the spread of the whole head, not just the lesion core.
  ocsvm::TrainConfig train = config.train;
  if (!train.gamma) {
    train.gamma = ocsvm::default_gamma(extract_features(
        result.denoised, head.mask, BoundingBox{0, image.height() - 1, 0, image.width() - 1},
        config.patch_size));
  }
  result.model = ocsvm::train(samples, train);

  const ocsvm::OcsvmModel& model = *result.model;
  std::vector<char> tumor(image.size(), 0);
  parallel_rows(image.height(), config.jobs, [&](int lo, int hi) {
    for (int r = lo; r < hi; ++r) {
      for (int c = 0; c < image.width(); ++c) {
        if (!head.mask.at(r, c)) continue;
        const auto x = patch_features(result.denoised, r, c, config.patch_size);
        if (ocsvm::decide(model, x).label == ocsvm::Label::Tumor) {
          tumor[image.index(r, c)] = 1;
        }
      }
    }
  });
  for (std::size_t i = 0; i < tumor.size(); ++i) result.mask.set(i, tumor[i] != 0);
  if (config.cleanup) result.mask = preprocess::largest_component(result.mask);
  return result;
}

MetricsReport metrics_from_counts(const ConfusionCounts& counts) {
  MetricsReport report;
  report.counts = counts;
  const std::size_t total = counts.total();
  report.accuracy = total == 0 ? 1.0
                               : static_cast<double>(counts.tp + counts.tn) /
                                     static_cast<double>(total);
  const std::size_t denom = 2 * counts.tp + counts.fp + counts.fn;
  report.si = denom == 0 ? 1.0
                         : static_cast<double>(2 * counts.tp) / static_cast<double>(denom);
  return report;
}

MetricsReport evaluate(const BinaryMask& predicted, const BinaryMask& truth,
                       const BinaryMask& domain) {
  require_same_shape(predicted, truth, "evaluate");
  require_same_shape(predicted, domain, "evaluate");
  ConfusionCounts counts;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (!domain[i]) continue;
    const bool p = predicted[i];
    const bool t = truth[i];
    if (p && t) {
      ++counts.tp;
    } else if (p) {
      ++counts.fp;
    } else if (t) {
      ++counts.fn;
    } else {
      ++counts.tn;
    }
  }
  return metrics_from_counts(counts);
}

std::string metrics_to_json(const MetricsReport& report) {
  nlohmann::ordered_json j;
  j["tp"] = report.counts.tp;
  j["fp"] = report.counts.fp;
  j["fn"] = report.counts.fn;
  j["tn"] = report.counts.tn;
  j["accuracy"] = round6(report.accuracy);
  j["si"] = round6(report.si);
  return j.dump(2) + "\n";
}

}  // namespace tumorseg::pipeline
