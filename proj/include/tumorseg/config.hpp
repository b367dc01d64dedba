#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "tumorseg/pipeline.hpp"

namespace tumorseg::config {

/// Everything a CLI run reads from its --config file.
struct RunConfig {
  pipeline::PipelineConfig pipeline;
  /// Ground-truth mask; when present, segment also writes metrics.json.
  std::optional<std::filesystem::path> truth;
  /// Evaluation domain: "head", "image", or a path to a mask PGM.
  std::string domain = "head";
  /// Precomputed head mask for the fbb subcommand.
  std::optional<std::filesystem::path> mask;
};

/// Accepts a JSON object or `dotted.key = value` lines ('#' starts a
/// comment). Unknown keys are errors; absent keys keep module defaults.
///
///   diffusion.{lambda,k,iterations,function,neighborhood}
///   bin_count, detection_threshold, min_extent, central_fraction,
///   patch_size, cleanup, train.{nu,gamma,tolerance,max_passes,
///   max_samples,seed}, truth, domain, mask
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);

/// Only the diffusion block, for the diffuse subcommand.
preprocess::DiffusionParams diffusion_from_config(const RunConfig& config);

std::string run_config_to_json(const RunConfig& config);

}  // namespace tumorseg::config
