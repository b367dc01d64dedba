#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "oracles.hpp"
#include "tumorseg/phantom.hpp"

using namespace tumorseg;
using namespace tumorseg::phantom;

TEST_CASE("noise-free symmetric phantom is exactly mirror-symmetric") {
  auto spec = symmetric_spec(3);
  spec.noise_sigma = 0.0;
  const Phantom p = generate(spec);
  CHECK(p.image.mirrored() == p.image);
  CHECK(p.head_truth.mirrored() == p.head_truth);
  CHECK(p.lesion_truth.count() == 0);
}

TEST_CASE("generation is deterministic per seed") {
  const Phantom a = generate(standard_lesion_spec(7));
  const Phantom b = generate(standard_lesion_spec(7));
  CHECK(a.image == b.image);
  CHECK(a.lesion_truth == b.lesion_truth);
  CHECK_FALSE(generate(standard_lesion_spec(8)).image == a.image);
}

TEST_CASE("lesion truth matches the rational ellipse scan") {
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 11ULL, 29ULL}) {
    const PhantomSpec spec = seed == 1 ? standard_lesion_spec(1) : random_lesion_spec(seed);
    const Phantom p = generate(spec);
    const auto& l = *spec.lesion;
    const BinaryMask ref = oracle::ellipse_raster(spec.width, spec.height, l.center_row,
                                                  l.center_col, l.semi_rows, l.semi_cols);
    CHECK(p.lesion_truth == ref);
    const auto& h = spec.head;
    CHECK(p.head_truth == oracle::ellipse_raster(spec.width, spec.height, h.center_row,
                                                 h.center_col, h.semi_rows, h.semi_cols));
  }
}

TEST_CASE("standard lesion spans rows 40-60 and cols 70-90") {
  const Phantom p = generate(standard_lesion_spec(1));
  CHECK(mask_bounds(p.lesion_truth) == BoundingBox{40, 60, 70, 90});
}

TEST_CASE("truth masks ignore noise and seed; head contains lesion") {
  auto a = random_lesion_spec(5);
  auto b = a;
  b.noise_sigma = 0.0;
  b.seed = 999;
  const Phantom pa = generate(a);
  const Phantom pb = generate(b);
  CHECK(pa.head_truth == pb.head_truth);
  CHECK(pa.lesion_truth == pb.lesion_truth);
  for (std::size_t i = 0; i < pa.lesion_truth.size(); ++i) {
    if (pa.lesion_truth[i]) CHECK(pa.head_truth[i]);
  }
}

TEST_CASE("random lesions stay in one half of the head") {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const PhantomSpec spec = random_lesion_spec(seed);
    const Phantom p = generate(spec);
    const BoundingBox box = mask_bounds(p.lesion_truth);
    const bool left = box.col_max < spec.head.center_col;
    const bool right = box.col_min > spec.head.center_col;
    CHECK((left || right));
    CHECK(p.lesion_truth.count() >= 0.01 * static_cast<double>(p.head_truth.count()));
  }
}

TEST_CASE("image intensities are clamped to [0, 255]") {
  auto spec = standard_lesion_spec(2);
  spec.noise_sigma = 200.0;
  const Phantom p = generate(spec);
  for (const double v : p.image.pixels()) {
    CHECK(v >= 0.0);
    CHECK(v <= 255.0);
  }
}

TEST_CASE("normal source has plausible moments") {
  NormalSource src(12);
  double s = 0.0;
  double s2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = src.next();
    s += x;
    s2 += x * x;
  }
  CHECK(std::abs(s / n) < 0.01);
  CHECK(std::abs(s2 / n - 1.0) < 0.02);
}

TEST_CASE("spec validation names the field") {
  auto spec = standard_lesion_spec(1);
  spec.lesion->center_col = 63.5;
  CHECK_THROWS_WITH_AS(spec.validate(), doctest::Contains("lesion"), Error);
  spec = standard_lesion_spec(1);
  spec.noise_sigma = -1.0;
  CHECK_THROWS_WITH_AS(spec.validate(), doctest::Contains("noise_sigma"), Error);
  spec = standard_lesion_spec(1);
  spec.head.semi_cols = 80.0;
  CHECK_THROWS_WITH_AS(spec.validate(), doctest::Contains("head"), Error);
}

TEST_CASE("spec JSON round trip and unknown keys") {
  const PhantomSpec spec = random_lesion_spec(4);
  const PhantomSpec back = spec_from_json(spec_to_json(spec));
  CHECK(spec_to_json(back) == spec_to_json(spec));
  CHECK(generate(back).image == generate(spec).image);
  CHECK_THROWS_AS(spec_from_json("{\"widht\": 10}"), Error);
}
