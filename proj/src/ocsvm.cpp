#include "tumorseg/ocsvm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "json.hpp"

namespace tumorseg::ocsvm {

namespace {

constexpr double kAlphaFloor = 1e-12;
constexpr double kMinCurvature = 1e-12;
constexpr double kVarianceFloor = 1e-6;

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  // Rejection keeps the draw unbiased and independent of the standard
  // library's distribution implementation.
  const std::uint64_t limit = std::mt19937_64::max() - std::mt19937_64::max() % bound;
  std::uint64_t x = rng();
  while (x >= limit) x = rng();
  return x % bound;
}

void check_samples(const std::vector<FeatureVector>& samples) {
  if (samples.empty()) throw Error("train: empty sample set");
  const std::size_t dim = samples.front().size();
  if (dim == 0) throw Error("train: zero-length feature vectors");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].size() != dim) {
      throw Error("train: inconsistent feature dimension at sample " +
                  std::to_string(i));
    }
    for (const double v : samples[i]) {
      if (!std::isfinite(v)) {
        throw Error("train: non-finite feature at sample " + std::to_string(i));
      }
    }
  }
}

std::string label_of(BiasRule rule) {
  return rule == BiasRule::MarginMean ? "margin-mean" : "fallback-max";
}

}  // namespace

void TrainConfig::validate() const {
  if (!(nu > 0.0 && nu <= 1.0)) throw Error("nu must lie in (0, 1]");
  if (gamma && !(*gamma > 0.0 && std::isfinite(*gamma))) {
    throw Error("gamma must be positive and finite");
  }
  if (!(tolerance > 0.0)) throw Error("tolerance must be positive");
  if (max_passes < 1) throw Error("max_passes must be >= 1");
  if (max_samples < 1) throw Error("max_samples must be >= 1");
}

double rbf_kernel(std::span<const double> x, std::span<const double> y,
                  double gamma) {
  if (x.size() != y.size()) {
    throw Error("rbf_kernel: length mismatch (" + std::to_string(x.size()) +
                " vs " + std::to_string(y.size()) + ")");
  }
  double dist2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    dist2 += d * d;
  }
  return std::exp(-gamma * dist2);
}

double default_gamma(const std::vector<FeatureVector>& samples) {
  check_samples(samples);
  const std::size_t dim = samples.front().size();
  double mean = 0.0;
  std::size_t n = 0;
  for (const auto& s : samples) {
    for (const double v : s) {
      mean += v;
      ++n;
    }
  }
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (const auto& s : samples) {
    for (const double v : s) ss += (v - mean) * (v - mean);
  }
  const double var = n > 1 ? ss / static_cast<double>(n - 1) : 0.0;
  return 1.0 / (static_cast<double>(dim) * std::max(var, kVarianceFloor));
}

Bias compute_bias(const std::vector<FeatureVector>& samples,
                  std::span<const double> alphas, double gamma, double nu,
                  double tolerance) {
  if (samples.size() != alphas.size()) {
    throw Error("compute_bias: sample/alpha count mismatch");
  }
  const double box = 1.0 / (nu * static_cast<double>(samples.size()));
  double margin_sum = 0.0;
  std::size_t margin_count = 0;
  double max_sum = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (alphas[i] <= kAlphaFloor) continue;
    double s = 0.0;
    for (std::size_t j = 0; j < samples.size(); ++j) {
      if (alphas[j] > kAlphaFloor) s += alphas[j] * rbf_kernel(samples[j], samples[i], gamma);
    }
    max_sum = std::max(max_sum, s);
    if (alphas[i] < box - tolerance) {
      margin_sum += s;
      ++margin_count;
    }
  }
  if (margin_count > 0) {
    return {margin_sum / static_cast<double>(margin_count), BiasRule::MarginMean};
  }
  return {max_sum, BiasRule::FallbackMax};
}

TrainResult train_detailed(const std::vector<FeatureVector>& all_samples,
                           const TrainConfig& config) {
  config.validate();
  check_samples(all_samples);

  TrainResult result;
  result.sample_indices.resize(all_samples.size());
  std::iota(result.sample_indices.begin(), result.sample_indices.end(), 0);
  if (all_samples.size() > config.max_samples) {
    std::mt19937_64 rng(config.seed);
    auto& idx = result.sample_indices;
    for (std::size_t i = 0; i < config.max_samples; ++i) {
      const std::size_t j = i + uniform_below(rng, idx.size() - i);
      std::swap(idx[i], idx[j]);
    }
    idx.resize(config.max_samples);
    std::sort(idx.begin(), idx.end());
  }
  std::vector<FeatureVector> samples;
  samples.reserve(result.sample_indices.size());
  for (const std::size_t i : result.sample_indices) samples.push_back(all_samples[i]);

  const std::size_t n = samples.size();
  const double gamma = config.gamma ? *config.gamma : default_gamma(samples);
  const double box = 1.0 / (config.nu * static_cast<double>(n));

  std::vector<double> q(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    q[i * n + i] = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double k = rbf_kernel(samples[i], samples[j], gamma);
      q[i * n + j] = k;
      q[j * n + i] = k;
    }
  }

  std::vector<double> alpha(n, 1.0 / static_cast<double>(n));
  std::vector<double> grad(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) grad[i] += q[i * n + j] * alpha[j];
  }

  // Optimality: some rho has grad_i >= rho where alpha_i < box and
  // grad_j <= rho where alpha_j > 0. The maximal violating pair moves mass
  // from the largest-gradient j that can shrink to the smallest-gradient i
  // that can grow, keeping sum(alpha) fixed.
  std::int64_t updates = 0;
  double violation = 0.0;
  while (true) {
    std::size_t up = n;
    std::size_t low = n;
    for (std::size_t k = 0; k < n; ++k) {
      if (alpha[k] < box && (up == n || grad[k] < grad[up])) up = k;
      if (alpha[k] > 0.0 && (low == n || grad[k] > grad[low])) low = k;
    }
    violation = (up == n || low == n) ? 0.0 : grad[low] - grad[up];
    if (violation < config.tolerance) break;
    if (updates >= config.max_passes) {
      std::ostringstream msg;
      msg << "train: no convergence after " << updates
          << " pair updates (max violation " << violation << ")";
      throw Error(msg.str());
    }
    const double curvature =
        std::max(q[up * n + up] + q[low * n + low] - 2.0 * q[up * n + low], kMinCurvature);
    const double room_up = box - alpha[up];
    const double room_low = alpha[low];
    double step = violation / curvature;
    bool up_at_box = false;
    bool low_at_zero = false;
    if (step >= room_up || step >= room_low) {
      step = std::min(room_up, room_low);
      up_at_box = step == room_up;
      low_at_zero = step == room_low;
    }
    alpha[up] = up_at_box ? box : alpha[up] + step;
    alpha[low] = low_at_zero ? 0.0 : alpha[low] - step;
    for (std::size_t k = 0; k < n; ++k) {
      grad[k] += step * (q[k * n + up] - q[k * n + low]);
    }
    ++updates;
  }

  const Bias bias = compute_bias(samples, alpha, gamma, config.nu, config.tolerance);
  OcsvmModel& model = result.model;
  model.gamma = gamma;
  model.nu = config.nu;
  model.feature_dim = static_cast<int>(samples.front().size());
  model.b = bias.b;
  model.bias_rule = bias.rule;
  for (std::size_t i = 0; i < n; ++i) {
    if (alpha[i] > kAlphaFloor) {
      model.support_vectors.push_back(samples[i]);
      model.alphas.push_back(alpha[i]);
    }
  }
  result.alphas = std::move(alpha);
  result.updates = updates;
  result.violation = violation;
  return result;
}

OcsvmModel train(const std::vector<FeatureVector>& samples,
                 const TrainConfig& config) {
  return train_detailed(samples, config).model;
}

Decision decide(const OcsvmModel& model, std::span<const double> x) {
  if (static_cast<int>(x.size()) != model.feature_dim) {
    throw Error("decide: feature dimension " + std::to_string(x.size()) +
                " does not match model dimension " +
                std::to_string(model.feature_dim));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < model.alphas.size(); ++i) {
    sum += model.alphas[i] * rbf_kernel(model.support_vectors[i], x, model.gamma);
  }
  Decision d;
  d.score = sum - model.b;
  d.label = d.score >= 0.0 ? Label::Tumor : Label::NonTumor;
  return d;
}

double dual_objective(const OcsvmModel& model) {
  double total = 0.0;
  const std::size_t n = model.alphas.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      total += model.alphas[i] * model.alphas[j] *
               rbf_kernel(model.support_vectors[i], model.support_vectors[j], model.gamma);
    }
  }
  return 0.5 * total;
}

std::string model_to_json(const OcsvmModel& model) {
  nlohmann::ordered_json j;
  j["feature_dim"] = model.feature_dim;
  j["gamma"] = model.gamma;
  j["nu"] = model.nu;
  j["b"] = model.b;
  j["alphas"] = model.alphas;
  j["support_vectors"] = model.support_vectors;
  j["bias_rule"] = label_of(model.bias_rule);
  return j.dump(2) + "\n";
}

OcsvmModel model_from_json(const std::string& text) {
  OcsvmModel model;
  try {
    const auto j = nlohmann::json::parse(text);
    model.feature_dim = j.at("feature_dim").get<int>();
    model.gamma = j.at("gamma").get<double>();
    model.nu = j.at("nu").get<double>();
    model.b = j.at("b").get<double>();
    model.alphas = j.at("alphas").get<std::vector<double>>();
    model.support_vectors = j.at("support_vectors").get<std::vector<FeatureVector>>();
    const auto rule = j.at("bias_rule").get<std::string>();
    if (rule == "margin-mean") {
      model.bias_rule = BiasRule::MarginMean;
    } else if (rule == "fallback-max") {
      model.bias_rule = BiasRule::FallbackMax;
    } else {
      throw Error("unknown bias_rule: " + rule);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("invalid model JSON: ") + e.what());
  }
  if (model.alphas.size() != model.support_vectors.size()) {
    throw Error("invalid model JSON: alphas/support_vectors length mismatch");
  }
  for (const auto& sv : model.support_vectors) {
    if (static_cast<int>(sv.size()) != model.feature_dim) {
      throw Error("invalid model JSON: support vector dimension mismatch");
    }
  }
  return model;
}

}  // namespace tumorseg::ocsvm
