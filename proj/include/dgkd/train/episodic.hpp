// Copyright 2026 The dgkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>

#include "dgkd/core/rng.hpp"
#include "dgkd/data/balancing.hpp"
#include "dgkd/model/encoder.hpp"
#include "dgkd/model/split.hpp"
#include "dgkd/train/config.hpp"
#include "dgkd/train/objective.hpp"

namespace dgkd::train {

/// Single-domain ERM models used as frozen donors, keyed by domain name.
struct CompanionBank {
  std::map<std::string, model::SpanModel> models;

  /// Throws naming the domain when absent.
  const model::SpanModel& at(const std::string& domain) const;
  /// Throws naming the first source domain without a companion.
  void require_domains(std::span<const std::string> domains) const;
};

struct EpisodeDraw {
  std::size_t split_layer = 1;
  model::SplitSide trainable_side = model::SplitSide::lower;
  std::string donor_domain;
};

/// k uniform in [1, L−1], side uniform, donor uniform over the bank's
/// domains other than `batch_domain` (restricted to `eligible` when non-empty).
EpisodeDraw draw_episode(std::size_t num_layers, const std::string& batch_domain, const CompanionBank& bank,
                         std::span<const std::string> eligible, Rng& rng);

struct EpisodicStep {
  EpisodeDraw draw;
  LossBreakdown loss;
  model::ParameterSet gradient;
};

/// Gradient of λ_erm·L(θ) + λ_episodic·L(hybrid) for one single-domain batch.
EpisodicStep episodic_step(const model::SpanModel& model, const CompanionBank& bank, const data::Batch& batch,
                           const TrainConfig& cfg, Rng& rng, std::span<const std::string> eligible = {},
                           const TeacherLogitCache* teacher = nullptr);

void save_companions(const std::filesystem::path& dir, const CompanionBank& bank, const std::string& tokenizer_id);
/// Loads `<dir>/<domain>.ckpt` for each domain.
CompanionBank load_companions(const std::filesystem::path& dir, std::span<const std::string> domains);

}  // namespace dgkd::train
