// Copyright 2026 The dgkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "dgkd/model/encoder.hpp"
#include "dgkd/synth/generator.hpp"
#include "dgkd/train/config.hpp"

namespace dgkd::cli {

struct SourceSpec {
  std::string name;
  std::filesystem::path train;
  std::filesystem::path dev;
};

struct TargetSpec {
  std::string name;
  std::filesystem::path test;
};

/// Hyperparameter grid searched by `sweep`. Method-specific axes apply only
/// to the methods that use them.
struct SweepGrid {
  std::vector<double> learning_rate{5e-4};
  std::vector<std::size_t> epochs{2};
  std::vector<double> tau{1.0, 2.0, 4.0};
  std::vector<double> lambda_adv{0.1, 0.01};
  std::vector<double> lambda_erm{0.75};
  std::vector<double> beta{1.0};
};

/// One experiment, read from a JSON file. Relative paths resolve against
/// the config file's directory.
struct ExperimentConfig {
  std::filesystem::path config_path;
  std::filesystem::path output_dir;
  std::vector<std::uint64_t> seeds{1};
  std::vector<SourceSpec> sources;
  std::vector<TargetSpec> targets;
  std::size_t max_len = 128;
  std::size_t stride = 0;
  std::size_t min_count = 1;
  std::size_t max_vocab = 0;
  model::EncoderConfig student;  // vocab_size is filled from the tokenizer
  model::EncoderConfig teacher;
  nlohmann::json train_settings = nlohmann::json::object();  // TrainConfig fields shared by every method
  train::TrainConfig teacher_train;  // always run as erm
  train::TrainConfig companion_train;
  std::map<std::string, nlohmann::json> method_overrides;  // method → TrainConfig fields
  SweepGrid grid;
  synth::GeneratorConfig generator;  // per-source seed and domain are derived
  std::vector<train::Method> methods;  // families expected by report/coverage
  std::size_t jobs = 1;

  /// Throws naming the first problem: missing files, empty grids, duplicate names.
  void validate() const;

  /// Hyperparameters of `method` before any sweep choice: method defaults,
  /// then the shared settings, then the per-method overrides.
  train::TrainConfig method_config(train::Method method) const;
};

/// Parses the file and applies DGKD_OUTPUT_DIR and DGKD_JOBS.
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
ExperimentConfig experiment_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
nlohmann::json to_json(const ExperimentConfig& cfg);

}  // namespace dgkd::cli
