#include "tumorseg/fbb.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>

namespace tumorseg::fbb {

Histogram::Histogram(int bin_count) {
  if (bin_count < 2) throw Error("histogram needs at least 2 bins");
  weights_.assign(static_cast<std::size_t>(bin_count), 0.0);
}

Histogram Histogram::from_weights(std::vector<double> weights) {
  if (weights.size() < 2) throw Error("histogram needs at least 2 bins");
  Histogram h;
  for (const double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw Error("histogram weights must be finite and non-negative");
    }
    h.total_ += w;
  }
  h.weights_ = std::move(weights);
  return h;
}

std::vector<double> Histogram::probabilities() const {
  std::vector<double> p(weights_.size(), 0.0);
  if (empty()) return p;
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = weights_[i] / total_;
  return p;
}

int Histogram::bin_of(double intensity, int bin_count) {
  const int bin = static_cast<int>(std::floor(intensity * bin_count / kHigh));
  return std::clamp(bin, 0, bin_count - 1);
}

void Histogram::add(int bin, double weight) {
  weights_[static_cast<std::size_t>(bin)] += weight;
  total_ += weight;
}

Histogram build_histogram(const GrayImage& image, const BinaryMask& mask,
                          const BoundingBox& region, int bin_count) {
  require_same_shape(image, mask, "build_histogram");
  if (!region.valid_in(image.width(), image.height())) {
    throw Error("build_histogram: invalid region");
  }
  Histogram hist(bin_count);
  for (int r = region.row_min; r <= region.row_max; ++r) {
    for (int c = region.col_min; c <= region.col_max; ++c) {
      if (mask.at(r, c)) hist.add(Histogram::bin_of(image.at(r, c), bin_count));
    }
  }
  return hist;
}

double bhattacharyya_counts(const double* p, const double* q, int bins) {
  double sp = 0.0;
  double sq = 0.0;
  double cross = 0.0;
  for (int i = 0; i < bins; ++i) {
    sp += p[i];
    sq += q[i];
    cross += std::sqrt(p[i] * q[i]);
  }
  if (sp == 0.0 && sq == 0.0) return 1.0;
  if (sp == 0.0 || sq == 0.0) return 0.0;
  return std::clamp(cross / std::sqrt(sp * sq), 0.0, 1.0);
}

double bhattacharyya(const Histogram& p, const Histogram& q) {
  if (p.bin_count() != q.bin_count()) {
    throw Error("bhattacharyya: bin count mismatch (" +
                std::to_string(p.bin_count()) + " vs " +
                std::to_string(q.bin_count()) + ")");
  }
  if (p.empty() || q.empty()) throw Error("bhattacharyya: empty histogram");
  std::vector<double> pw(p.bin_count());
  std::vector<double> qw(q.bin_count());
  for (int i = 0; i < p.bin_count(); ++i) {
    pw[i] = p.weight(i);
    qw[i] = q.weight(i);
  }
  return bhattacharyya_counts(pw.data(), qw.data(), p.bin_count());
}

void FbbParams::validate() const {
  if (bin_count < 2) throw Error("fbb bin_count must be >= 2");
  if (!(detection_threshold >= 0.0 && detection_threshold <= 1.0)) {
    throw Error("fbb detection_threshold must lie in [0, 1]");
  }
  if (min_extent < 1) throw Error("fbb min_extent must be >= 1");
}

int reflect_column(int col, double axis_col) {
  return static_cast<int>(std::lround(2.0 * axis_col - col));
}

namespace {

// Pixel pairs mirrored about an axis at twice_axis / 2. Offset j walks away
// from the axis on both sides: test_col(j) and ref_col(j) reflect onto each
// other. A pair is usable only when both pixels lie in the mask.
class MirrorPairs {
 public:
  MirrorPairs(const GrayImage& image, const BinaryMask& mask, long twice_axis,
              Side side, int bin_count)
      : width_(image.width()), height_(image.height()), side_(side) {
    const long first_right = twice_axis / 2 + 1;
    const long first_left = (twice_axis + 1) / 2 - 1;
    first_right_ = first_right;
    first_left_ = first_left;
    offsets_ = static_cast<int>(
        std::max(0L, std::min<long>(width_ - first_right, first_left + 1)));
    test_bin_.assign(static_cast<std::size_t>(offsets_) * height_, -1);
    ref_bin_.assign(test_bin_.size(), -1);
    for (int r = 0; r < height_; ++r) {
      for (int j = 0; j < offsets_; ++j) {
        const int tc = test_col(j);
        const int rc = ref_col(j);
        if (!mask.at(r, tc) || !mask.at(r, rc)) continue;
        test_bin_[cell(r, j)] = Histogram::bin_of(image.at(r, tc), bin_count);
        ref_bin_[cell(r, j)] = Histogram::bin_of(image.at(r, rc), bin_count);
      }
    }
  }

  int offsets() const { return offsets_; }
  int height() const { return height_; }
  bool usable(int r, int j) const { return test_bin_[cell(r, j)] >= 0; }
  int test_bin(int r, int j) const { return test_bin_[cell(r, j)]; }
  int ref_bin(int r, int j) const { return ref_bin_[cell(r, j)]; }

  int test_col(int j) const {
    return static_cast<int>(side_ == Side::Right ? first_right_ + j
                                                 : first_left_ - j);
  }
  int ref_col(int j) const {
    return static_cast<int>(side_ == Side::Right ? first_left_ - j
                                                 : first_right_ + j);
  }

 private:
  std::size_t cell(int r, int j) const {
    return static_cast<std::size_t>(r) * offsets_ + j;
  }

  int width_;
  int height_;
  Side side_;
  long first_right_ = 0;
  long first_left_ = 0;
  int offsets_ = 0;
  std::vector<int> test_bin_;
  std::vector<int> ref_bin_;
};

// Cumulative test/reflected histograms along one direction, so any interval
// histogram costs O(bins).
class StripHistograms {
 public:
  StripHistograms(int strips, int bins)
      : strips_(strips), bins_(bins),
        test_(static_cast<std::size_t>(strips + 1) * bins, 0.0),
        ref_(test_.size(), 0.0),
        occupied_(static_cast<std::size_t>(strips + 1), 0) {}

  void add(int strip, int test_bin, int ref_bin) {
    test_[index(strip + 1, test_bin)] += 1.0;
    ref_[index(strip + 1, ref_bin)] += 1.0;
    occupied_[static_cast<std::size_t>(strip + 1)] = 1;
  }

  void accumulate() {
    for (int s = 1; s <= strips_; ++s) {
      for (int b = 0; b < bins_; ++b) {
        test_[index(s, b)] += test_[index(s - 1, b)];
        ref_[index(s, b)] += ref_[index(s - 1, b)];
      }
      occupied_[static_cast<std::size_t>(s)] += occupied_[static_cast<std::size_t>(s - 1)];
    }
  }

  struct Evaluation {
    double score = 0.0;
    double inside_bc = 1.0;
    bool valid = false;
  };

  // score(a, b) = (1 - BC_inside) + BC_outside over strips [a, b].
  Evaluation evaluate(int a, int b, std::vector<double>& scratch) const {
    double* in_t = scratch.data();
    double* in_r = in_t + bins_;
    double* out_t = in_r + bins_;
    double* out_r = out_t + bins_;
    double inside_total = 0.0;
    for (int k = 0; k < bins_; ++k) {
      in_t[k] = test_[index(b + 1, k)] - test_[index(a, k)];
      in_r[k] = ref_[index(b + 1, k)] - ref_[index(a, k)];
      out_t[k] = test_[index(strips_, k)] - in_t[k];
      out_r[k] = ref_[index(strips_, k)] - in_r[k];
      inside_total += in_t[k];
    }
    Evaluation e;
    if (inside_total == 0.0) return e;
    e.inside_bc = bhattacharyya_counts(in_t, in_r, bins_);
    e.score = (1.0 - e.inside_bc) + bhattacharyya_counts(out_t, out_r, bins_);
    e.valid = true;
    return e;
  }

  struct Best {
    int a = -1;
    int b = -1;
    Evaluation eval;
  };

  // Exhaustive over intervals whose end strips hold pairs and which span at
  // least min_extent occupied strips. Ties keep the lexicographically
  // smallest (a, b).
  Best search(int min_extent) const {
    std::vector<double> scratch(static_cast<std::size_t>(bins_) * 4);
    Best best;
    for (int a = 0; a < strips_; ++a) {
      if (!occupied(a)) continue;
      for (int b = a; b < strips_; ++b) {
        if (!occupied(b) || occupied_count(a, b) < min_extent) continue;
        const Evaluation e = evaluate(a, b, scratch);
        if (!e.valid) continue;
        if (best.a < 0 || e.score > best.eval.score) best = {a, b, e};
      }
    }
    return best;
  }

 private:
  std::size_t index(int strip, int bin) const {
    return static_cast<std::size_t>(strip) * bins_ + bin;
  }
  int occupied_count(int a, int b) const {
    return occupied_[static_cast<std::size_t>(b + 1)] - occupied_[static_cast<std::size_t>(a)];
  }
  bool occupied(int s) const { return occupied_count(s, s) > 0; }

  int strips_;
  int bins_;
  std::vector<double> test_;
  std::vector<double> ref_;
  std::vector<int> occupied_;
};

struct SideResult {
  bool valid = false;
  BoundingBox box;
  double inside_dissimilarity = 0.0;
  double score = 0.0;
  // 1 - BC between the box and the rest of its own half. The mirrored
  // searches share inside_dissimilarity, so this decides the side.
  double self_contrast = 0.0;
};

double self_contrast(const MirrorPairs& pairs, int row_lo, int row_hi, int off_lo,
                     int off_hi, int bins) {
  std::vector<double> inside(static_cast<std::size_t>(bins), 0.0);
  std::vector<double> rest(inside.size(), 0.0);
  for (int r = 0; r < pairs.height(); ++r) {
    for (int j = 0; j < pairs.offsets(); ++j) {
      if (!pairs.usable(r, j)) continue;
      const bool in = r >= row_lo && r <= row_hi && j >= off_lo && j <= off_hi;
      (in ? inside : rest)[pairs.test_bin(r, j)] += 1.0;
    }
  }
  return 1.0 - bhattacharyya_counts(inside.data(), rest.data(), bins);
}

SideResult search_side(const MirrorPairs& pairs, const FbbParams& params) {
  SideResult result;
  const int bins = params.bin_count;
  if (pairs.offsets() == 0) return result;

  StripHistograms rows(pairs.height(), bins);
  for (int r = 0; r < pairs.height(); ++r) {
    for (int j = 0; j < pairs.offsets(); ++j) {
      if (pairs.usable(r, j)) rows.add(r, pairs.test_bin(r, j), pairs.ref_bin(r, j));
    }
  }
  rows.accumulate();
  const auto vertical = rows.search(params.min_extent);
  if (vertical.a < 0) return result;

  StripHistograms cols(pairs.offsets(), bins);
  for (int r = vertical.a; r <= vertical.b; ++r) {
    for (int j = 0; j < pairs.offsets(); ++j) {
      if (pairs.usable(r, j)) cols.add(j, pairs.test_bin(r, j), pairs.ref_bin(r, j));
    }
  }
  cols.accumulate();
  const auto horizontal = cols.search(params.min_extent);
  if (horizontal.a < 0) return result;

  const int c0 = pairs.test_col(horizontal.a);
  const int c1 = pairs.test_col(horizontal.b);
  result.valid = true;
  result.box = {vertical.a, vertical.b, std::min(c0, c1), std::max(c0, c1)};
  result.inside_dissimilarity = 1.0 - horizontal.eval.inside_bc;
  result.score = horizontal.eval.score;
  result.self_contrast = self_contrast(pairs, vertical.a, vertical.b, horizontal.a,
                                       horizontal.b, bins);
  return result;
}

long to_twice_axis(double axis_col) {
  const double twice = 2.0 * axis_col;
  if (std::abs(twice - std::round(twice)) > 1e-9) {
    throw Error("axis column must be a multiple of 0.5");
  }
  return std::lround(twice);
}

}  // namespace

double estimate_axis(const GrayImage& image, const BinaryMask& mask,
                     int bin_count) {
  require_same_shape(image, mask, "estimate_axis");
  if (bin_count < 2) throw Error("estimate_axis: bin_count must be >= 2");

  // Centroid kept as the exact fraction col_sum / count.
  std::int64_t count = 0;
  std::int64_t col_sum = 0;
  for (int r = 0; r < mask.height(); ++r) {
    for (int c = 0; c < mask.width(); ++c) {
      if (mask.at(r, c)) {
        ++count;
        col_sum += c;
      }
    }
  }
  if (count == 0) throw Error("estimate_axis: empty mask");

  const int w = image.width();
  // Candidate h = 2 * axis: |h/2 - centroid| <= 0.1 * w, i.e.
  // 10 * |h * count - 2 * col_sum| <= 2 * w * count.
  auto distance = [&](std::int64_t h) { return std::llabs(h * count - 2 * col_sum); };
  const std::int64_t h_centre = (2 * col_sum) / count;
  std::int64_t h_lo = h_centre;
  while (h_lo - 1 >= 0 && 10 * distance(h_lo - 1) <= 2LL * w * count) --h_lo;
  std::int64_t h_hi = h_centre;
  while (h_hi + 1 <= 2LL * (w - 1) && 10 * distance(h_hi + 1) <= 2LL * w * count) ++h_hi;

  std::int64_t best_h = -1;
  double best_bc = -1.0;
  // The extra last bin collects reflections that land outside the head, so
  // a misplaced axis is penalised by the shape of the mask as well as by
  // intensities.
  const int outside_bin = bin_count;
  std::vector<double> left(static_cast<std::size_t>(bin_count) + 1);
  std::vector<double> right(left.size());
  for (std::int64_t h = h_lo; h <= h_hi; ++h) {
    std::fill(left.begin(), left.end(), 0.0);
    std::fill(right.begin(), right.end(), 0.0);
    for (int r = 0; r < image.height(); ++r) {
      for (int c = 0; 2LL * c < h; ++c) {
        const std::int64_t m = h - c;
        const bool in_left = mask.at(r, c);
        const bool in_right = m < w && mask.at(r, static_cast<int>(m));
        if (!in_left && !in_right) continue;
        left[in_left ? Histogram::bin_of(image.at(r, c), bin_count) : outside_bin] += 1.0;
        right[in_right ? Histogram::bin_of(image.at(r, static_cast<int>(m)), bin_count)
                       : outside_bin] += 1.0;
      }
    }
    double total = 0.0;
    for (const double v : left) total += v;
    if (total == 0.0) continue;
    const double bc = bhattacharyya_counts(left.data(), right.data(), bin_count + 1);
    const bool better = best_h < 0 || bc > best_bc ||
                        (bc == best_bc && distance(h) < distance(best_h));
    if (better) {
      best_h = h;
      best_bc = bc;
    }
  }
  if (best_h < 0) {
    // No mirrored pairs anywhere in the window: fall back to the centroid.
    best_h = h_centre;
  }
  return static_cast<double>(best_h) / 2.0;
}

FbbResult search_about_axis(const GrayImage& image, const BinaryMask& mask,
                            double axis_col, const FbbParams& params) {
  require_same_shape(image, mask, "find_bounding_box");
  params.validate();
  if (!mask.any()) throw Error("find_bounding_box: empty mask");
  const long twice_axis = to_twice_axis(axis_col);

  FbbResult result;
  result.axis_col = axis_col;
  const SideResult right =
      search_side(MirrorPairs(image, mask, twice_axis, Side::Right, params.bin_count), params);
  const SideResult left =
      search_side(MirrorPairs(image, mask, twice_axis, Side::Left, params.bin_count), params);

  const SideResult* winner = nullptr;
  if (right.valid && (!left.valid || right.self_contrast >= left.self_contrast)) {
    winner = &right;
    result.side = Side::Right;
  } else if (left.valid) {
    winner = &left;
    result.side = Side::Left;
  }
  if (winner == nullptr) return result;

  result.inside_dissimilarity = winner->inside_dissimilarity;
  result.score = winner->score;
  result.found = winner->inside_dissimilarity >= params.detection_threshold;
  if (result.found) result.box = winner->box;
  return result;
}

FbbResult find_bounding_box(const GrayImage& image, const BinaryMask& mask,
                            const FbbParams& params) {
  params.validate();
  if (!mask.any()) throw Error("find_bounding_box: empty mask");
  const double axis = estimate_axis(image, mask, params.bin_count);
  return search_about_axis(image, mask, axis, params);
}

}  // namespace tumorseg::fbb
