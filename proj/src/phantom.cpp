#include "tumorseg/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "json.hpp"

namespace tumorseg::phantom {

namespace {

using nlohmann::json;

Ellipse mirrored(const Ellipse& e, double axis_col) {
  Ellipse m = e;
  m.center_col = 2.0 * axis_col - e.center_col;
  return m;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw Error("invalid phantom spec: " + message);
}

void check_ellipse(const Ellipse& e, const std::string& name) {
  require(std::isfinite(e.center_row) && std::isfinite(e.center_col),
          name + ".center must be finite");
  require(e.semi_rows > 0.0 && e.semi_cols > 0.0,
          name + ".semi_rows/semi_cols must be positive");
  require(e.intensity >= 0.0 && e.intensity <= 255.0,
          name + ".intensity must lie in [0,255]");
}

// Every pixel of `inner` lies in `outer`; returns the number of pixels.
std::size_t count_inside(const Ellipse& inner, const Ellipse& outer, int width,
                         int height, bool* all_inside) {
  std::size_t count = 0;
  *all_inside = true;
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      if (!inner.contains(r, c)) continue;
      ++count;
      if (!outer.contains(r, c)) *all_inside = false;
    }
  }
  return count;
}

bool overlaps(const Ellipse& a, const Ellipse& b, int width, int height) {
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      if (a.contains(r, c) && b.contains(r, c)) return true;
    }
  }
  return false;
}

json ellipse_to_json(const Ellipse& e) {
  return {{"center_row", e.center_row}, {"center_col", e.center_col},
          {"semi_rows", e.semi_rows},   {"semi_cols", e.semi_cols},
          {"intensity", e.intensity}};
}

void reject_unknown(const json& j, std::initializer_list<const char*> keys,
                    const std::string& where) {
  if (!j.is_object()) throw Error("phantom spec: " + where + " must be an object");
  for (const auto& item : j.items()) {
    if (std::find_if(keys.begin(), keys.end(), [&](const char* k) {
          return item.key() == k;
        }) == keys.end()) {
      throw Error("phantom spec: unknown key '" + where + item.key() + "'");
    }
  }
}

Ellipse ellipse_from_json(const json& j, Ellipse e, const std::string& where) {
  reject_unknown(j, {"center_row", "center_col", "semi_rows", "semi_cols", "intensity"},
                 where + ".");
  if (j.contains("center_row")) e.center_row = j["center_row"].get<double>();
  if (j.contains("center_col")) e.center_col = j["center_col"].get<double>();
  if (j.contains("semi_rows")) e.semi_rows = j["semi_rows"].get<double>();
  if (j.contains("semi_cols")) e.semi_cols = j["semi_cols"].get<double>();
  if (j.contains("intensity")) e.intensity = j["intensity"].get<double>();
  return e;
}

}  // namespace

NormalSource::NormalSource(std::uint64_t seed) : engine_(seed) {}

double NormalSource::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double NormalSource::next() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

void PhantomSpec::validate() const {
  require(width > 0 && height > 0, "width/height must be positive");
  check_ellipse(head, "head");
  check_ellipse(ventricle, "ventricles");
  require(head.center_row - head.semi_rows >= 0.0 &&
              head.center_row + head.semi_rows <= height - 1.0 &&
              head.center_col - head.semi_cols >= 0.0 &&
              head.center_col + head.semi_cols <= width - 1.0,
          "head must fit inside the raster");
  require(background >= 0.0 && background <= 255.0, "background must lie in [0,255]");
  require(noise_sigma >= 0.0 && std::isfinite(noise_sigma), "noise_sigma must be >= 0");

  bool inside = false;
  const std::size_t vcount = count_inside(ventricle, head, width, height, &inside);
  require(vcount > 0 && inside, "ventricles must lie inside the head");

  if (lesion) {
    check_ellipse(*lesion, "lesion");
    const std::size_t lcount = count_inside(*lesion, head, width, height, &inside);
    require(lcount > 0 && inside, "lesion must lie inside the head");
    bool left = false;
    bool right = false;
    for (int r = 0; r < height; ++r) {
      for (int c = 0; c < width; ++c) {
        if (!lesion->contains(r, c)) continue;
        if (c <= head.center_col) left = true;
        if (c >= head.center_col) right = true;
      }
    }
    require(!(left && right), "lesion must not cross the mirror axis");
  }
}

Phantom generate(const PhantomSpec& spec) {
  spec.validate();
  const int w = spec.width;
  const int h = spec.height;
  const Ellipse ventricle_right = mirrored(spec.ventricle, spec.head.center_col);

  Phantom out{GrayImage(w, h, spec.background), BinaryMask(w, h), BinaryMask(w, h)};
  NormalSource noise(spec.seed);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      double v = spec.background;
      if (spec.head.contains(r, c)) {
        out.head_truth.set(r, c, true);
        v = spec.head.intensity;
        if (spec.ventricle.contains(r, c) || ventricle_right.contains(r, c)) {
          v = spec.ventricle.intensity;
        }
        if (spec.lesion && spec.lesion->contains(r, c)) {
          out.lesion_truth.set(r, c, true);
          v = spec.lesion->intensity;
        }
      }
      if (spec.noise_sigma > 0.0) v += spec.noise_sigma * noise.next();
      out.image.at(r, c) = std::clamp(v, 0.0, 255.0);
    }
  }
  return out;
}

PhantomSpec symmetric_spec(std::uint64_t seed) {
  PhantomSpec spec;
  spec.seed = seed;
  return spec;
}

PhantomSpec standard_lesion_spec(std::uint64_t seed) {
  PhantomSpec spec = symmetric_spec(seed);
  spec.lesion = Ellipse{50.0, 80.0, 10.0, 10.0, 200.0};
  return spec;
}

PhantomSpec random_lesion_spec(std::uint64_t seed) {
  PhantomSpec spec = symmetric_spec(seed);
  const Ellipse ventricle_right = mirrored(spec.ventricle, spec.head.center_col);
  NormalSource rng(seed ^ 0x9E3779B97F4A7C15ULL);
  auto between = [&](double lo, double hi) { return lo + (hi - lo) * rng.uniform(); };
  for (int attempt = 0; attempt < 10000; ++attempt) {
    Ellipse lesion;
    const bool right = rng.uniform() < 0.5;
    lesion.semi_rows = std::round(between(6.0, 13.0));
    lesion.semi_cols = std::round(between(6.0, 13.0));
    lesion.intensity = std::round(between(170.0, 230.0));
    lesion.center_row = std::round(between(spec.head.center_row - 38.0,
                                           spec.head.center_row + 38.0));
    const double offset = std::round(between(lesion.semi_cols + 3.0, 36.0));
    lesion.center_col = spec.head.center_col + (right ? offset : -offset);
    spec.lesion = lesion;
    if (overlaps(lesion, spec.ventricle, spec.width, spec.height) ||
        overlaps(lesion, ventricle_right, spec.width, spec.height)) {
      continue;
    }
    try {
      spec.validate();
      return spec;
    } catch (const Error&) {
    }
  }
  throw Error("random_lesion_spec: could not place a lesion");
}

BoundingBox mask_bounds(const BinaryMask& mask) {
  BoundingBox box{mask.height(), -1, mask.width(), -1};
  for (int r = 0; r < mask.height(); ++r) {
    for (int c = 0; c < mask.width(); ++c) {
      if (!mask.at(r, c)) continue;
      box.row_min = std::min(box.row_min, r);
      box.row_max = std::max(box.row_max, r);
      box.col_min = std::min(box.col_min, c);
      box.col_max = std::max(box.col_max, c);
    }
  }
  if (box.row_max < 0) throw Error("mask_bounds: empty mask");
  return box;
}

std::string spec_to_json(const PhantomSpec& spec) {
  nlohmann::ordered_json j;
  j["width"] = spec.width;
  j["height"] = spec.height;
  j["background"] = spec.background;
  j["head"] = ellipse_to_json(spec.head);
  j["ventricles"] = ellipse_to_json(spec.ventricle);
  j["lesion"] = spec.lesion ? ellipse_to_json(*spec.lesion) : json(nullptr);
  j["noise_sigma"] = spec.noise_sigma;
  j["seed"] = spec.seed;
  return j.dump(2) + "\n";
}

PhantomSpec spec_from_json(const std::string& text) {
  PhantomSpec spec;
  try {
    const json j = json::parse(text);
    reject_unknown(j, {"width", "height", "background", "head", "ventricles", "lesion",
                       "noise_sigma", "seed"},
                   "");
    if (j.contains("width")) spec.width = j["width"].get<int>();
    if (j.contains("height")) spec.height = j["height"].get<int>();
    if (j.contains("background")) spec.background = j["background"].get<double>();
    if (j.contains("head")) spec.head = ellipse_from_json(j["head"], spec.head, "head");
    if (j.contains("ventricles")) {
      spec.ventricle = ellipse_from_json(j["ventricles"], spec.ventricle, "ventricles");
    }
    if (j.contains("lesion") && !j["lesion"].is_null()) {
      spec.lesion = ellipse_from_json(j["lesion"], Ellipse{}, "lesion");
    }
    if (j.contains("noise_sigma")) spec.noise_sigma = j["noise_sigma"].get<double>();
    if (j.contains("seed")) spec.seed = j["seed"].get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw Error(std::string("phantom spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

}  // namespace tumorseg::phantom
