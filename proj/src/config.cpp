#include "tumorseg/config.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <sstream>

#include "json.hpp"

namespace tumorseg::config {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

// key=value lines become the equivalent nested JSON object.
json parse_key_values(const std::string& text) {
  json root = json::object();
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error("config line " + std::to_string(line_no) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string raw = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw Error("config line " + std::to_string(line_no) + ": empty key");
    }
    json value;
    try {
      value = json::parse(raw);
    } catch (const json::exception&) {
      value = raw;
    }
    json* node = &root;
    std::size_t start = 0;
    while (true) {
      const auto dot = key.find('.', start);
      const std::string part = key.substr(start, dot - start);
      if (dot == std::string::npos) {
        (*node)[part] = value;
        break;
      }
      if (!node->contains(part)) (*node)[part] = json::object();
      node = &(*node)[part];
      if (!node->is_object()) throw Error("config key conflict at '" + key + "'");
      start = dot + 1;
    }
  }
  return root;
}

class Reader {
 public:
  Reader(const json& j, std::string prefix) : j_(j), prefix_(std::move(prefix)) {
    if (!j_.is_object()) throw Error("config: '" + prefix_ + "' must be an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.push_back(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw Error("config: bad value for '" + prefix_ + key + "'");
    }
  }

  const json* child(const char* key) {
    seen_.push_back(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  void reject_unknown() const {
    for (const auto& item : j_.items()) {
      if (std::find(seen_.begin(), seen_.end(), item.key()) == seen_.end()) {
        throw Error("config: unknown key '" + prefix_ + item.key() + "'");
      }
    }
  }

 private:
  const json& j_;
  std::string prefix_;
  std::vector<std::string> seen_;
};

preprocess::Conduction conduction_from(const std::string& name) {
  if (name == "exponential") return preprocess::Conduction::Exponential;
  if (name == "rational") return preprocess::Conduction::Rational;
  throw Error("config: diffusion.function must be 'exponential' or 'rational'");
}

preprocess::Neighborhood neighborhood_from(int n) {
  if (n == 4) return preprocess::Neighborhood::Four;
  if (n == 8) return preprocess::Neighborhood::Eight;
  throw Error("config: diffusion.neighborhood must be 4 or 8");
}

RunConfig from_json(const json& root) {
  RunConfig cfg;
  auto& p = cfg.pipeline;
  Reader top(root, "");

  if (const json* d = top.child("diffusion")) {
    Reader r(*d, "diffusion.");
    std::string function = "exponential";
    int neighborhood = 8;
    r.get("lambda", p.diffusion.lambda);
    r.get("k", p.diffusion.k);
    r.get("iterations", p.diffusion.iterations);
    r.get("function", function);
    r.get("neighborhood", neighborhood);
    r.reject_unknown();
    p.diffusion.function = conduction_from(function);
    p.diffusion.neighborhood = neighborhood_from(neighborhood);
  }
  top.get("bin_count", p.fbb.bin_count);
  top.get("detection_threshold", p.fbb.detection_threshold);
  top.get("min_extent", p.fbb.min_extent);
  top.get("central_fraction", p.central_fraction);
  top.get("patch_size", p.patch_size);
  top.get("cleanup", p.cleanup);
  if (const json* t = top.child("train")) {
    Reader r(*t, "train.");
    r.get("nu", p.train.nu);
    double gamma = 0.0;
    r.get("gamma", gamma);
    if (t->contains("gamma") && !t->at("gamma").is_null()) p.train.gamma = gamma;
    r.get("tolerance", p.train.tolerance);
    r.get("max_passes", p.train.max_passes);
    r.get("max_samples", p.train.max_samples);
    r.get("seed", p.train.seed);
    r.reject_unknown();
  }
  if (const json* v = top.child("truth")) {
    if (!v->is_string()) throw Error("config: 'truth' must be a path string");
    cfg.truth = v->get<std::string>();
  }
  top.get("domain", cfg.domain);
  if (const json* v = top.child("mask")) {
    if (!v->is_string()) throw Error("config: 'mask' must be a path string");
    cfg.mask = v->get<std::string>();
  }
  top.reject_unknown();
  p.validate();
  return cfg;
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
  const std::string body = trim(text);
  if (body.empty()) return RunConfig{};
  json root;
  if (body.front() == '{') {
    try {
      root = json::parse(body);
    } catch (const json::exception& e) {
      throw Error(std::string("config: invalid JSON: ") + e.what());
    }
  } else {
    root = parse_key_values(body);
  }
  return from_json(root);
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open config file: " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_run_config(text);
}

preprocess::DiffusionParams diffusion_from_config(const RunConfig& config) {
  return config.pipeline.diffusion;
}

std::string run_config_to_json(const RunConfig& config) {
  const auto& p = config.pipeline;
  nlohmann::ordered_json j;
  j["diffusion"] = {
      {"lambda", p.diffusion.lambda},
      {"k", p.diffusion.k},
      {"iterations", p.diffusion.iterations},
      {"function", p.diffusion.function == preprocess::Conduction::Exponential
                       ? "exponential"
                       : "rational"},
      {"neighborhood", static_cast<int>(p.diffusion.neighborhood)}};
  j["bin_count"] = p.fbb.bin_count;
  j["detection_threshold"] = p.fbb.detection_threshold;
  j["min_extent"] = p.fbb.min_extent;
  j["central_fraction"] = p.central_fraction;
  j["patch_size"] = p.patch_size;
  j["cleanup"] = p.cleanup;
  j["train"] = {{"nu", p.train.nu},
                {"gamma", p.train.gamma ? json(*p.train.gamma) : json(nullptr)},
                {"tolerance", p.train.tolerance},
                {"max_passes", p.train.max_passes},
                {"max_samples", p.train.max_samples},
                {"seed", p.train.seed}};
  if (config.truth) j["truth"] = config.truth->string();
  j["domain"] = config.domain;
  if (config.mask) j["mask"] = config.mask->string();
  return j.dump(2) + "\n";
}

}  // namespace tumorseg::config
