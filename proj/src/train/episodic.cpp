// Copyright 2026 The dgkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "dgkd/train/episodic.hpp"

#include <algorithm>

#include "dgkd/core/error.hpp"
#include "dgkd/model/checkpoint.hpp"

namespace dgkd::train {

const model::SpanModel& CompanionBank::at(const std::string& domain) const {
  const auto it = models.find(domain);
  if (it == models.end()) throw MissingArtifact("no companion model for domain '" + domain + "'");
  return it->second;
}

void CompanionBank::require_domains(std::span<const std::string> domains) const {
  for (const auto& d : domains) at(d);
}

EpisodeDraw draw_episode(std::size_t num_layers, const std::string& batch_domain, const CompanionBank& bank,
                         std::span<const std::string> eligible, Rng& rng) {
  if (num_layers < 2) throw Error("episodic training needs at least two transformer layers");
  std::vector<std::string> donors;
  for (const auto& [domain, unused] : bank.models) {
    const bool allowed = eligible.empty() || std::find(eligible.begin(), eligible.end(), domain) != eligible.end();
    if (allowed && domain != batch_domain) donors.push_back(domain);
  }
  if (donors.empty()) throw Error("no companion from a domain other than '" + batch_domain + "'");
  EpisodeDraw draw;
  draw.split_layer = 1 + rng.index(num_layers - 1);
  draw.trainable_side = rng.index(2) == 0 ? model::SplitSide::lower : model::SplitSide::upper;
  draw.donor_domain = donors[rng.index(donors.size())];
  return draw;
}

EpisodicStep episodic_step(const model::SpanModel& model, const CompanionBank& bank, const data::Batch& batch,
                           const TrainConfig& cfg, Rng& rng, std::span<const std::string> eligible,
                           const TeacherLogitCache* teacher) {
  EpisodicStep out;
  out.draw = draw_episode(model.config.num_layers, batch.domain, bank, eligible, rng);
  const TaskLoss task = teacher != nullptr ? TaskLoss::kd : TaskLoss::span_ce;
  BatchObjective objective(model.config, batch.windows, task, cfg.tau, teacher);
  objective.set_task_weight(cfg.lambda_erm);
  if (cfg.lambda_episodic() > 0.0) {
    const auto& donor = bank.at(out.draw.donor_domain);
    if (!(donor.config == model.config)) throw Error("companion architecture differs from the trained model");
    objective.set_hybrid({&donor.params, model::split_parameters(model, out.draw.split_layer, out.draw.trainable_side),
                          cfg.lambda_episodic()});
  }
  out.loss = objective.evaluate(model.params, &out.gradient);
  return out;
}

void save_companions(const std::filesystem::path& dir, const CompanionBank& bank, const std::string& tokenizer_id) {
  std::filesystem::create_directories(dir);
  for (const auto& [domain, m] : bank.models) {
    model::Checkpoint ckpt;
    ckpt.meta.method = "companion";
    ckpt.meta.combo_id = domain;
    ckpt.meta.tokenizer_id = tokenizer_id;
    ckpt.model = m;
    model::save_checkpoint(dir / (domain + ".ckpt"), ckpt);
  }
}

CompanionBank load_companions(const std::filesystem::path& dir, std::span<const std::string> domains) {
  CompanionBank bank;
  for (const auto& d : domains) {
    const auto path = dir / (d + ".ckpt");
    if (!std::filesystem::exists(path)) {
      throw MissingArtifact("missing companion for domain '" + d + "' at " + path.string() +
                            " (run `dgkd train-companions`)");
    }
    bank.models.emplace(d, model::load_checkpoint(path).model);
  }
  return bank;
}

}  // namespace dgkd::train
