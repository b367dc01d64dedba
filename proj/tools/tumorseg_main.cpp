// tumorseg command-line frontend.
//
// Exit codes: 0 success, 1 error, 2 no detection. Every output file of a
// run is staged under a temporary name and renamed only after all outputs
// were produced, so a failed run leaves nothing behind.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tumorseg/config.hpp"
#include "tumorseg/fbb.hpp"
#include "tumorseg/imgio.hpp"
#include "tumorseg/phantom.hpp"
#include "tumorseg/pipeline.hpp"

namespace fs = std::filesystem;
using namespace tumorseg;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitNoDetection = 2;

std::string one_line(std::string msg) {
  std::replace(msg.begin(), msg.end(), '\n', ' ');
  return msg;
}

void report(const std::string& msg) { std::cerr << "tumorseg: error: " << one_line(msg) << "\n"; }

// Collects named outputs in memory and publishes them all at once.
class OutputSet {
 public:
  explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}

  void add(const std::string& name, std::string bytes) {
    files_.emplace_back(name, std::move(bytes));
  }

  void commit() {
    std::error_code ec;
    const bool existed = fs::exists(dir_, ec);
    if (!existed) {
      fs::create_directories(dir_, ec);
      if (ec) throw Error("cannot create output directory " + dir_.string() + ": " + ec.message());
    }
    std::vector<fs::path> staged;
    std::vector<fs::path> published;
    auto rollback = [&] {
      std::error_code ignore;
      for (const auto& p : staged) fs::remove(p, ignore);
      for (const auto& p : published) fs::remove(p, ignore);
      if (!existed) fs::remove(dir_, ignore);
    };
    try {
      for (const auto& [name, bytes] : files_) {
        const fs::path tmp = dir_ / ("." + name + ".tmp");
        staged.push_back(tmp);
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.close();
        if (!out) throw Error("cannot write " + tmp.string());
      }
      for (std::size_t i = 0; i < files_.size(); ++i) {
        const fs::path target = dir_ / files_[i].first;
        fs::rename(staged[i], target, ec);
        if (ec) throw Error("cannot write " + target.string() + ": " + ec.message());
        published.push_back(target);
      }
    } catch (...) {
      rollback();
      throw;
    }
  }

 private:
  fs::path dir_;
  std::vector<std::pair<std::string, std::string>> files_;
};

struct Common {
  std::vector<std::string> inputs;
  std::string config;
  std::string out;
  std::optional<int> neighborhood;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  std::string preset = "standard";
};

// Relative paths inside a config file resolve against the file's directory.
fs::path resolve(const fs::path& p, const std::string& config_path) {
  if (p.is_absolute() || config_path.empty()) return p;
  return fs::path(config_path).parent_path() / p;
}

config::RunConfig load_config(const Common& c) {
  config::RunConfig cfg;
  if (!c.config.empty()) cfg = config::load_run_config(c.config);
  if (cfg.truth) cfg.truth = resolve(*cfg.truth, c.config);
  if (cfg.mask) cfg.mask = resolve(*cfg.mask, c.config);
  if (c.neighborhood) {
    cfg.pipeline.diffusion.neighborhood = *c.neighborhood == 4
                                              ? preprocess::Neighborhood::Four
                                              : preprocess::Neighborhood::Eight;
  }
  if (c.seed) cfg.pipeline.train.seed = *c.seed;
  cfg.pipeline.jobs = c.jobs;
  return cfg;
}

BinaryMask domain_mask(const config::RunConfig& cfg, const std::string& config_path,
                       int width, int height, const std::optional<BinaryMask>& head) {
  if (cfg.domain == "image") return BinaryMask(width, height, true);
  if (cfg.domain == "head") {
    if (head) return *head;
    if (cfg.mask) return imgio::load_mask_pgm(*cfg.mask);
    return BinaryMask(width, height, true);
  }
  return imgio::load_mask_pgm(resolve(cfg.domain, config_path));
}

std::string box_json(const fbb::FbbResult& r, bool details) {
  nlohmann::ordered_json j;
  if (r.box) {
    j["row_min"] = r.box->row_min;
    j["row_max"] = r.box->row_max;
    j["col_min"] = r.box->col_min;
    j["col_max"] = r.box->col_max;
    j["side"] = r.side == fbb::Side::Left ? "left" : "right";
  } else {
    for (const char* k : {"row_min", "row_max", "col_min", "col_max", "side"}) j[k] = nullptr;
  }
  j["found"] = r.found;
  if (details) {
    j["axis_col"] = r.axis_col;
    j["inside_dissimilarity"] = r.inside_dissimilarity;
  }
  return j.dump(2) + "\n";
}

int segment_one(const fs::path& input, const fs::path& out_dir, const config::RunConfig& cfg,
                const std::string& config_path) {
  const GrayImage image = imgio::load_gray_pgm(input);
  const pipeline::SegmentResult result = pipeline::segment(image, cfg.pipeline);

  OutputSet outputs(out_dir);
  outputs.add("mask.pgm", imgio::encode_mask_pgm(result.mask));
  outputs.add("overlay.pgm",
              imgio::encode_gray_pgm(imgio::render_overlay(image, result.mask, result.detection.box)));
  outputs.add("box.json", box_json(result.detection, false));
  if (result.model) outputs.add("model.json", ocsvm::model_to_json(*result.model));
  if (cfg.truth) {
    const BinaryMask truth = imgio::load_mask_pgm(*cfg.truth);
    const BinaryMask domain =
        domain_mask(cfg, config_path, image.width(), image.height(), result.head_mask);
    outputs.add("metrics.json",
                pipeline::metrics_to_json(pipeline::evaluate(result.mask, truth, domain)));
  }
  outputs.commit();
  return result.detection.found ? kExitOk : kExitNoDetection;
}

int cmd_segment(const Common& c) {
  config::RunConfig cfg = load_config(c);
  if (c.inputs.size() == 1) return segment_one(c.inputs.front(), c.out, cfg, c.config);

  // Batch: one subdirectory per input, named after the file stem. Stems
  // shared by several inputs get a 1-based position prefix.
  std::map<std::string, int> stem_uses;
  for (const auto& in : c.inputs) ++stem_uses[fs::path(in).stem().string()];
  std::vector<fs::path> out_dirs;
  for (std::size_t i = 0; i < c.inputs.size(); ++i) {
    const std::string stem = fs::path(c.inputs[i]).stem().string();
    const std::string name =
        stem_uses[stem] > 1 ? std::to_string(i + 1) + "_" + stem : stem;
    out_dirs.push_back(fs::path(c.out) / name);
  }
  cfg.pipeline.jobs = 1;
  std::vector<int> codes(c.inputs.size(), kExitError);
  std::vector<std::string> errors(c.inputs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < c.inputs.size(); i = next++) {
      const fs::path in = c.inputs[i];
      try {
        codes[i] = segment_one(in, out_dirs[i], cfg, c.config);
      } catch (const std::exception& e) {
        errors[i] = in.string() + ": " + e.what();
      }
    }
  };
  const int workers = std::clamp(c.jobs, 1, static_cast<int>(c.inputs.size()));
  std::vector<std::thread> pool;
  for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  int code = kExitOk;
  for (std::size_t i = 0; i < codes.size(); ++i) {
    if (!errors[i].empty()) report(errors[i]);
    if (codes[i] == kExitError) code = kExitError;
    else if (codes[i] == kExitNoDetection && code == kExitOk) code = kExitNoDetection;
  }
  return code;
}

const std::string& single_input(const Common& c) {
  if (c.inputs.size() != 1) throw Error("this subcommand takes exactly one --input");
  return c.inputs.front();
}

int cmd_diffuse(const Common& c) {
  const config::RunConfig cfg = load_config(c);
  const GrayImage image = imgio::load_gray_pgm(single_input(c));
  OutputSet outputs(c.out);
  outputs.add("diffused.pgm",
              imgio::encode_gray_pgm(preprocess::diffuse(image, config::diffusion_from_config(cfg))));
  outputs.commit();
  return kExitOk;
}

int cmd_fbb(const Common& c) {
  const config::RunConfig cfg = load_config(c);
  const GrayImage image = imgio::load_gray_pgm(single_input(c));
  const BinaryMask mask =
      cfg.mask ? imgio::load_mask_pgm(*cfg.mask) : preprocess::skull_strip(image).mask;
  const fbb::FbbResult result = fbb::find_bounding_box(image, mask, cfg.pipeline.fbb);
  OutputSet outputs(c.out);
  outputs.add("box.json", box_json(result, true));
  outputs.commit();
  return result.found ? kExitOk : kExitNoDetection;
}

int cmd_metrics(const Common& c) {
  const config::RunConfig cfg = load_config(c);
  if (!cfg.truth) throw Error("metrics needs 'truth' in the config");
  const BinaryMask predicted = imgio::load_mask_pgm(single_input(c));
  const BinaryMask truth = imgio::load_mask_pgm(*cfg.truth);
  const BinaryMask domain =
      domain_mask(cfg, c.config, predicted.width(), predicted.height(), std::nullopt);
  OutputSet outputs(c.out);
  outputs.add("metrics.json", pipeline::metrics_to_json(pipeline::evaluate(predicted, truth, domain)));
  outputs.commit();
  return kExitOk;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int cmd_phantom(const Common& c) {
  if (!c.inputs.empty()) throw Error("phantom takes no --input");
  const std::uint64_t seed = c.seed.value_or(1);
  phantom::PhantomSpec spec;
  if (!c.config.empty()) {
    spec = phantom::spec_from_json(read_file(c.config));
    if (c.seed) spec.seed = *c.seed;
  } else if (c.preset == "standard") {
    spec = phantom::standard_lesion_spec(seed);
  } else if (c.preset == "symmetric") {
    spec = phantom::symmetric_spec(seed);
  } else {
    spec = phantom::random_lesion_spec(seed);
  }
  const phantom::Phantom p = phantom::generate(spec);
  OutputSet outputs(c.out);
  outputs.add("image.pgm", imgio::encode_gray_pgm(p.image));
  outputs.add("head.pgm", imgio::encode_mask_pgm(p.head_truth));
  outputs.add("lesion.pgm", imgio::encode_mask_pgm(p.lesion_truth));
  outputs.add("spec.json", phantom::spec_to_json(spec));
  outputs.commit();
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Symmetry-guided tumour segmentation for 2-D grayscale rasters"};
  app.require_subcommand(1);
  Common c;

  auto add_io = [&](CLI::App* sub, bool input_required) {
    auto* in = sub->add_option("--input", c.inputs, "Input PGM (segment: repeat for batch)");
    if (input_required) in->required();
    sub->add_option("--config", c.config, "Config file (JSON or key=value lines)");
    sub->add_option("--out", c.out, "Output directory")->required();
  };

  auto* segment = app.add_subcommand("segment", "Run the full pipeline");
  add_io(segment, true);
  segment->add_option("--neighborhood", c.neighborhood, "Diffusion neighbourhood")
      ->check(CLI::IsMember({4, 8}));
  segment->add_option("--seed", c.seed, "Training subsample seed");
  segment->add_option("--jobs", c.jobs, "Worker threads")->check(CLI::PositiveNumber);

  auto* diffuse = app.add_subcommand("diffuse", "Anisotropic diffusion only");
  add_io(diffuse, true);
  diffuse->add_option("--neighborhood", c.neighborhood, "Diffusion neighbourhood")
      ->check(CLI::IsMember({4, 8}));

  auto* fbb_cmd = app.add_subcommand("fbb", "Symmetry bounding box only");
  add_io(fbb_cmd, true);

  auto* metrics = app.add_subcommand("metrics", "Compare a predicted mask with the config truth");
  add_io(metrics, true);

  auto* phantom_cmd = app.add_subcommand("phantom", "Write a synthetic phantom");
  add_io(phantom_cmd, false);
  phantom_cmd->add_option("--seed", c.seed, "Noise seed");
  phantom_cmd->add_option("--preset", c.preset, "Built-in spec when no --config is given")
      ->check(CLI::IsMember({"standard", "symmetric", "random"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report(e.what());
    return kExitError;
  }

  try {
    if (*segment) return cmd_segment(c);
    if (*diffuse) return cmd_diffuse(c);
    if (*fbb_cmd) return cmd_fbb(c);
    if (*metrics) return cmd_metrics(c);
    return cmd_phantom(c);
  } catch (const std::exception& e) {
    report(e.what());
    return kExitError;
  }
}
