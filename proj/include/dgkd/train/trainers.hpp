// Copyright 2026 The dgkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "dgkd/data/types.hpp"
#include "dgkd/model/checkpoint.hpp"
#include "dgkd/train/config.hpp"
#include "dgkd/train/episodic.hpp"
#include "dgkd/train/objective.hpp"
#include "dgkd/train/teacher_cache.hpp"

namespace dgkd::train {

struct TrainInputs {
  /// One labeled training set per source domain.
  std::vector<data::DomainDataset> train;
  /// In-combo dev sets used for epoch selection.
  std::vector<data::DomainDataset> dev;
  /// Unlabeled synthetic sets for the first kd_aug stage.
  std::vector<data::DomainDataset> synthetic;
  const TeacherLogitCache* teacher = nullptr;
  const CompanionBank* companions = nullptr;
  model::EncoderConfig model_config;
  std::string combo_id;
  std::string tokenizer_id;
  /// Starting weights; random init from the seed when unset.
  std::optional<model::ParameterSet> init;
};

struct StepRecord {
  std::size_t step = 0;  // global across stages
  std::size_t epoch = 0;
  std::string stage;  // "gold" or "synthetic"
  std::string domain;
  LossBreakdown loss;
  double lr = 0.0;
  std::optional<EpisodeDraw> episode;
  std::optional<std::string> meta_test_domain;
  double meta_test_loss = 0.0;
};

nlohmann::json to_json(const StepRecord& record);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  std::map<std::string, double> dev_f1;
  double dev_macro_f1 = 0.0;
};

struct TrainResult {
  model::Checkpoint checkpoint;  // selected epoch
  std::size_t selected_epoch = 0;
  std::vector<EpochRecord> epochs;  // gold stage only
  model::ParameterSet final_params;
  /// Weights after the synthetic stage (kd_aug only).
  std::optional<model::ParameterSet> synthetic_stage_params;
};

struct TrainHooks {
  std::function<void(const StepRecord&)> on_step;
  /// Called with the gradient the optimizer is about to apply.
  std::function<void(const StepRecord&, const model::ParameterSet&)> on_gradient;
};

/// Dispatches on cfg.method.
TrainResult train_model(const TrainConfig& cfg, const TrainInputs& inputs, const TrainHooks& hooks = {});

TrainResult train_erm(const TrainConfig& cfg, const TrainInputs& inputs, const TrainHooks& hooks = {});
TrainResult train_kd(const TrainConfig& cfg, const TrainInputs& inputs, const TrainHooks& hooks = {});
TrainResult train_kd_augmented(const TrainConfig& cfg, const TrainInputs& inputs, const TrainHooks& hooks = {});
TrainResult train_domain_adversarial(const TrainConfig& cfg, const TrainInputs& inputs,
                                     const TrainHooks& hooks = {});
TrainResult train_episodic(const TrainConfig& cfg, const TrainInputs& inputs, const TrainHooks& hooks = {});
TrainResult train_mldg(const TrainConfig& cfg, const TrainInputs& inputs, const TrainHooks& hooks = {});
TrainResult train_kd_with_dil(const TrainConfig& cfg, const TrainInputs& inputs, const TrainHooks& hooks = {});

/// Single-domain ERM companion for each training set.
CompanionBank train_companions(const TrainConfig& cfg, const TrainInputs& inputs);

}  // namespace dgkd::train
