#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tumorseg/image.hpp"

namespace tumorseg::ocsvm {

using FeatureVector = std::vector<double>;

struct TrainConfig {
  double nu = 0.1;
  /// RBF width; when unset, 1 / (feature_dim * pooled sample variance).
  std::optional<double> gamma;
  /// Bound on the maximal pairwise KKT violation at convergence.
  double tolerance = 1e-6;
  /// Upper bound on pair updates before training fails.
  std::int64_t max_passes = 1'000'000;
  /// Larger training sets are subsampled uniformly to this size.
  std::size_t max_samples = 2000;
  std::uint64_t seed = 0;

  void validate() const;
};

enum class BiasRule { MarginMean, FallbackMax };

struct OcsvmModel {
  std::vector<FeatureVector> support_vectors;
  std::vector<double> alphas;
  double b = 0.0;
  double gamma = 1.0;
  double nu = 0.1;
  int feature_dim = 0;
  BiasRule bias_rule = BiasRule::MarginMean;
};

enum class Label { Tumor, NonTumor };

struct Decision {
  double score = 0.0;
  Label label = Label::NonTumor;
};

/// Training outcome with solver diagnostics. `alphas` covers every sample
/// that entered the solver, zeros included.
struct TrainResult {
  OcsvmModel model;
  std::vector<double> alphas;
  std::vector<std::size_t> sample_indices;
  std::int64_t updates = 0;
  double violation = 0.0;
};

double rbf_kernel(std::span<const double> x, std::span<const double> y,
                  double gamma);

/// 1 / (dim * variance) over all feature values pooled together.
double default_gamma(const std::vector<FeatureVector>& samples);

/// Solves  min 1/2 a'Qa  s.t.  sum(a) = 1, 0 <= a_i <= 1/(nu*l)  with
/// Q_ij = k(x_i, x_j) by maximal-violating-pair coordinate descent.
TrainResult train_detailed(const std::vector<FeatureVector>& samples,
                           const TrainConfig& config);
OcsvmModel train(const std::vector<FeatureVector>& samples,
                 const TrainConfig& config);

struct Bias {
  double b = 0.0;
  BiasRule rule = BiasRule::MarginMean;
};

/// b = mean over margin support vectors (tolerance < a_i < C - tolerance)
/// of sum_j a_j k(x_j, x_i). Without margin vectors, b is the largest such
/// sum over all support vectors.
Bias compute_bias(const std::vector<FeatureVector>& samples,
                  std::span<const double> alphas, double gamma, double nu,
                  double tolerance);

/// score = sum_i a_i k(x_i, x) - b; Tumor iff score >= 0.
Decision decide(const OcsvmModel& model, std::span<const double> x);

/// 1/2 a'Qa over the stored support vectors.
double dual_objective(const OcsvmModel& model);

std::string model_to_json(const OcsvmModel& model);
OcsvmModel model_from_json(const std::string& text);

}  // namespace tumorseg::ocsvm
