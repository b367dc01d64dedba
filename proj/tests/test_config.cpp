#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "test_util.hpp"
#include "tumorseg/config.hpp"

using namespace tumorseg;
using namespace tumorseg::config;

TEST_CASE("empty text keeps every default") {
  const RunConfig c = parse_run_config("  \n# nothing\n");
  CHECK(run_config_to_json(c) == run_config_to_json(RunConfig{}));
  CHECK(c.domain == "head");
  CHECK_FALSE(c.truth.has_value());
}

TEST_CASE("key=value lines") {
  const RunConfig c = parse_run_config(
      "diffusion.k = 12.5   # edge stop\n"
      "diffusion.neighborhood = 4\n"
      "diffusion.function = rational\n"
      "bin_count = 32\n"
      "cleanup = true\n"
      "train.nu = 0.2\n"
      "train.gamma = 3\n"
      "truth = lesion.pgm\n"
      "domain = image\n");
  const auto& p = c.pipeline;
  CHECK(p.diffusion.k == 12.5);
  CHECK(p.diffusion.neighborhood == preprocess::Neighborhood::Four);
  CHECK(p.diffusion.function == preprocess::Conduction::Rational);
  CHECK(p.fbb.bin_count == 32);
  CHECK(p.cleanup);
  CHECK(p.train.nu == 0.2);
  CHECK(p.train.gamma == 3.0);
  CHECK(c.truth->string() == "lesion.pgm");
  CHECK(c.domain == "image");
}

TEST_CASE("JSON form is equivalent") {
  const RunConfig a = parse_run_config(R"({"diffusion": {"iterations": 4}, "patch_size": 1,
                                           "train": {"seed": 9}})");
  const RunConfig b = parse_run_config("diffusion.iterations=4\npatch_size=1\ntrain.seed=9\n");
  CHECK(run_config_to_json(a) == run_config_to_json(b));
  CHECK(a.pipeline.diffusion.iterations == 4);
}

TEST_CASE("serialised config parses back to itself") {
  const RunConfig c = parse_run_config("min_extent = 6\ntrain.gamma = 0.5\nmask = head.pgm\n");
  CHECK(run_config_to_json(parse_run_config(run_config_to_json(c))) == run_config_to_json(c));
}

TEST_CASE("unknown keys and bad values are rejected") {
  CHECK_THROWS_WITH_AS(parse_run_config("bin_cout = 3\n"), doctest::Contains("bin_cout"), Error);
  CHECK_THROWS_WITH_AS(parse_run_config("diffusion.kappa = 3\n"),
                       doctest::Contains("diffusion.kappa"), Error);
  CHECK_THROWS_AS(parse_run_config("diffusion.neighborhood = 6\n"), Error);
  CHECK_THROWS_AS(parse_run_config("diffusion.lambda = 0.25\n"), Error);
  CHECK_THROWS_AS(parse_run_config("patch_size = 2\n"), Error);
  CHECK_THROWS_AS(parse_run_config("bin_count = many\n"), Error);
  CHECK_THROWS_AS(parse_run_config("just words\n"), Error);
  CHECK_THROWS_AS(parse_run_config("{ broken json"), Error);
}

TEST_CASE("config files load from disk") {
  testutil::TempDir dir;
  testutil::write_bytes(dir / "run.cfg", "diffusion.k = 9\n");
  CHECK(load_run_config(dir / "run.cfg").pipeline.diffusion.k == 9.0);
  CHECK(diffusion_from_config(load_run_config(dir / "run.cfg")).k == 9.0);
  CHECK_THROWS_AS(load_run_config(dir / "absent.cfg"), Error);
}
