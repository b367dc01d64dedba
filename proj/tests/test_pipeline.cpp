#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "tumorseg/phantom.hpp"
#include "tumorseg/pipeline.hpp"

using namespace tumorseg;
using namespace tumorseg::pipeline;

TEST_CASE("central region halves each extent around the centre") {
  CHECK(central_region(BoundingBox{40, 60, 70, 90}, 0.5) == BoundingBox{45, 55, 75, 85});
  CHECK(central_region(BoundingBox{0, 9, 0, 9}, 1.0) == BoundingBox{0, 9, 0, 9});
  CHECK(central_region(BoundingBox{3, 3, 5, 6}, 0.1).valid_in(10, 10));
  CHECK_THROWS_AS(central_region(BoundingBox{0, 1, 0, 1}, 0.0), Error);
}

TEST_CASE("patch features") {
  const GrayImage one(1, 1, 127.5);
  CHECK(patch_features(one, 0, 0, 1) == ocsvm::FeatureVector{0.5});

  const GrayImage flat(5, 5, 100.0);
  for (const auto& v : extract_features(flat, BinaryMask(5, 5, true), BoundingBox{1, 3, 1, 3}, 3)) {
    CHECK(v == ocsvm::FeatureVector(9, 100.0 / 255.0));
  }

  const GrayImage corner(2, 2, {10, 20, 30, 40});
  const std::vector<double> expect{10, 10, 20, 10, 10, 20, 30, 30, 40};
  const auto f = patch_features(corner, 0, 0, 3);
  for (std::size_t i = 0; i < 9; ++i) CHECK(f[i] == expect[i] / 255.0);

  CHECK_THROWS_AS(patch_features(corner, 0, 0, 2), Error);
  CHECK_THROWS_AS(extract_features(corner, BinaryMask(2, 2, true), BoundingBox{0, 2, 0, 1}, 1),
                  Error);
}

TEST_CASE("symmetric phantom yields no detection and an empty mask") {
  const auto ph = phantom::generate(phantom::symmetric_spec(1));
  const SegmentResult r = segment(ph.image, PipelineConfig{});
  CHECK_FALSE(r.detection.found);
  CHECK(r.mask.count() == 0);
  CHECK_FALSE(r.model.has_value());
}

TEST_CASE("standard lesion phantom reaches SI 0.7") {
  const auto ph = phantom::generate(phantom::standard_lesion_spec(1));
  const SegmentResult r = segment(ph.image, PipelineConfig{});
  REQUIRE(r.detection.found);
  const MetricsReport m = evaluate(r.mask, ph.lesion_truth, ph.head_truth);
  CHECK(m.si >= 0.7);
  CHECK(m.accuracy >= 0.95);
}

TEST_CASE("output never leaves the head mask") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const auto ph = phantom::generate(phantom::random_lesion_spec(seed));
    const SegmentResult r = segment(ph.image, PipelineConfig{});
    for (std::size_t i = 0; i < r.mask.size(); ++i) {
      if (r.mask[i]) CHECK(r.head_mask[i]);
    }
  }
}

TEST_CASE("segment is deterministic and independent of the job count") {
  const auto ph = phantom::generate(phantom::standard_lesion_spec(3));
  PipelineConfig cfg;
  const SegmentResult a = segment(ph.image, cfg);
  cfg.jobs = 4;
  const SegmentResult b = segment(ph.image, cfg);
  CHECK(a.mask == b.mask);
  CHECK(a.model->alphas == b.model->alphas);
}

TEST_CASE("cleanup keeps a single component") {
  const auto ph = phantom::generate(phantom::standard_lesion_spec(2));
  PipelineConfig cfg;
  cfg.cleanup = true;
  const SegmentResult r = segment(ph.image, cfg);
  CHECK(preprocess::largest_component(r.mask) == r.mask);
}

TEST_CASE("metrics fixtures") {
  const MetricsReport m = metrics_from_counts({50, 10, 10, 930});
  CHECK(m.accuracy == doctest::Approx(0.98).epsilon(1e-12));
  CHECK(m.si == doctest::Approx(100.0 / 120.0).epsilon(1e-12));
  const MetricsReport empty = evaluate(BinaryMask(4, 4), BinaryMask(4, 4), BinaryMask(4, 4, true));
  CHECK(empty.accuracy == 1.0);
  CHECK(empty.si == 1.0);
  CHECK_THROWS_AS(evaluate(BinaryMask(4, 4), BinaryMask(3, 4), BinaryMask(4, 4)), Error);
}

TEST_CASE("metric properties over random masks") {
  std::mt19937_64 rng(10);
  for (int t = 0; t < 100; ++t) {
    BinaryMask p(8, 8), q(8, 8), d(8, 8), d_small(8, 8);
    BinaryMask np(8, 8), nq(8, 8);
    for (std::size_t i = 0; i < p.size(); ++i) {
      p.set(i, rng() % 2);
      q.set(i, rng() % 2);
      d.set(i, rng() % 4 != 0);
      d_small.set(i, d[i] && rng() % 2);
      np.set(i, !p[i]);
      nq.set(i, !q[i]);
    }
    const MetricsReport a = evaluate(p, q, d);
    const MetricsReport inv = evaluate(np, nq, d);
    CHECK(inv.counts.tp == a.counts.tn);
    CHECK(inv.counts.fp == a.counts.fn);
    CHECK(inv.accuracy == a.accuracy);
    CHECK(a.si >= 0.0);
    CHECK(a.si <= 1.0);
    CHECK(evaluate(p, q, d_small).counts.total() <= a.counts.total());
    CHECK(evaluate(p, p, d).accuracy == 1.0);
  }
}

TEST_CASE("metrics JSON rounds to six decimals") {
  const std::string j = metrics_to_json(metrics_from_counts({1, 1, 0, 4}));
  CHECK(j.find("\"si\": 0.666667") != std::string::npos);
  CHECK(j.find("\"accuracy\": 0.833333") != std::string::npos);
}

TEST_CASE("pipeline config validation") {
  PipelineConfig cfg;
  cfg.patch_size = 4;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = PipelineConfig{};
  cfg.central_fraction = 1.5;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = PipelineConfig{};
  cfg.jobs = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}
