// Copyright 2026 The dgkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "dgkd/train/trainers.hpp"

#include <algorithm>
#include <deque>

#include "dgkd/core/error.hpp"
#include "dgkd/core/rng.hpp"
#include "dgkd/data/balancing.hpp"
#include "dgkd/eval/metrics.hpp"
#include "dgkd/eval/scoring.hpp"
#include "dgkd/train/mldg.hpp"
#include "dgkd/train/optimizer.hpp"

namespace dgkd::train {
namespace {

enum class Family { plain, adversarial, episodic, mldg };

Family family_of(Method m) {
  switch (m) {
    case Method::domain_adv:
    case Method::kd_domain_adv:
      return Family::adversarial;
    case Method::episodic:
    case Method::kd_episodic:
      return Family::episodic;
    case Method::mldg:
    case Method::kd_mldg:
      return Family::mldg;
    default:
      return Family::plain;
  }
}

std::vector<std::string> domain_names(const std::vector<data::DomainDataset>& sets) {
  std::vector<std::string> names;
  for (const auto& ds : sets) names.push_back(ds.name);
  return names;
}

void check_windows(const std::vector<data::DomainDataset>& sets, bool need_labels, const TeacherLogitCache* teacher) {
  for (const auto& ds : sets) {
    for (const auto& w : ds.windows) {
      if (need_labels && !w.labeled()) throw Error("training window " + w.window_id + " has no gold answer span");
      if (teacher != nullptr) teacher->at(w.window_id);
    }
  }
}

class Run {
 public:
  Run(const TrainConfig& cfg, const TrainInputs& inputs, const TrainHooks& hooks)
      : cfg_(cfg), in_(inputs), hooks_(hooks), family_(family_of(cfg.method)), rng_(derive_seed(cfg.seed, 0x5e)) {
    cfg_.validate();
    if (in_.train.empty()) throw Error("no training data");
    for (const auto& ds : in_.train) {
      if (ds.windows.empty()) throw Error("training set '" + ds.name + "' has no windows");
    }
    if (uses_teacher(cfg_.method) && in_.teacher == nullptr) {
      throw MissingArtifact("method " + std::string(to_string(cfg_.method)) + " needs a teacher logit cache");
    }
    teacher_ = uses_teacher(cfg_.method) ? in_.teacher : nullptr;
    check_windows(in_.train, teacher_ == nullptr, teacher_);
    sources_ = domain_names(in_.train);
    if (family_ != Family::plain && in_.train.size() < 2) {
      throw Error("method " + std::string(to_string(cfg_.method)) + " needs at least two source domains");
    }
    if (family_ == Family::episodic) {
      if (in_.companions == nullptr) throw MissingArtifact("episodic training needs a companion bank");
      in_.companions->require_domains(sources_);
      if (in_.model_config.num_layers < 2) throw Error("episodic training needs at least two transformer layers");
    }
    const std::size_t num_domains = family_ == Family::adversarial ? in_.train.size() : 0;
    if (in_.init) {
      model_ = {in_.model_config, *in_.init};
      if (family_ == Family::adversarial && !model_.has_domain_head()) {
        model::attach_domain_head(model_, num_domains, derive_seed(cfg_.seed, 0xd0));
      }
    } else {
      model_ = model::init_span_model(in_.model_config, derive_seed(cfg_.seed, 0x1), num_domains);
    }
    for (std::size_t i = 0; i < sources_.size(); ++i) domain_index_[sources_[i]] = i;
  }

  TrainResult run() {
    if (cfg_.method == Method::kd_aug) {
      if (in_.synthetic.empty() || std::all_of(in_.synthetic.begin(), in_.synthetic.end(),
                                               [](const auto& ds) { return ds.windows.empty(); })) {
        throw Error("augmented KD needs a non-empty synthetic set");
      }
      check_windows(in_.synthetic, false, teacher_);
      std::vector<data::DomainDataset> synth;
      for (const auto& ds : in_.synthetic) {
        if (!ds.windows.empty()) synth.push_back(ds);
      }
      stage("synthetic", data::upsample_domains(std::move(synth), derive_seed(cfg_.seed, 0xa1)),
            cfg_.synthetic_epochs, false);
      result_.synthetic_stage_params = model_.params;
    }
    stage("gold", data::upsample_domains(in_.train, derive_seed(cfg_.seed, 0xa0)), cfg_.epochs, true);
    result_.final_params = model_.params;
    return std::move(result_);
  }

 private:
  void stage(const std::string& name, const std::vector<data::DomainDataset>& sets, std::size_t epochs, bool select) {
    const std::uint64_t stage_tag = name == "gold" ? 0 : 1;
    const std::size_t per_epoch = steps_per_epoch(sets);
    AdamW opt(model_.params, cfg_.optimizer,
              LinearSchedule(cfg_.learning_rate, per_epoch * epochs, cfg_.optimizer.warmup_fraction));
    std::optional<double> best_macro;
    for (std::size_t epoch = 1; epoch <= epochs; ++epoch) {
      const auto batches =
          data::single_domain_batches(sets, cfg_.batch_size, derive_seed(cfg_.seed, 0xb000 + stage_tag * 100 + epoch));
      double loss_sum = 0.0;
      std::size_t loss_n = 0;
      auto apply = [&](StepRecord rec, const model::ParameterSet& grad) {
        rec.step = ++global_step_;
        rec.epoch = epoch;
        rec.stage = name;
        if (hooks_.on_gradient) hooks_.on_gradient(rec, grad);
        rec.lr = opt.step(model_.params, grad);
        loss_sum += rec.loss.total;
        ++loss_n;
        if (hooks_.on_step) hooks_.on_step(rec);
      };
      if (family_ == Family::mldg) {
        mldg_epoch(batches, apply);
      } else {
        for (const auto& b : batches) {
          model::ParameterSet grad;
          StepRecord rec;
          rec.domain = b.domain;
          rec.loss = step_gradient(b, grad, rec);
          apply(std::move(rec), grad);
        }
      }
      if (!select) continue;
      EpochRecord er;
      er.epoch = epoch;
      er.train_loss = loss_n ? loss_sum / static_cast<double>(loss_n) : 0.0;
      if (!in_.dev.empty()) {
        er.dev_f1 = eval::dataset_f1(model_, in_.dev, cfg_.max_answer_len);
        er.dev_macro_f1 = eval::macro_f1(er.dev_f1);
      }
      result_.epochs.push_back(er);
      if (!best_macro || er.dev_macro_f1 > *best_macro) {
        best_macro = er.dev_macro_f1;
        result_.selected_epoch = epoch;
        result_.checkpoint.model = model_;
      }
    }
    if (select) {
      auto& meta = result_.checkpoint.meta;
      meta.method = std::string(to_string(cfg_.method));
      meta.epoch = result_.selected_epoch;
      meta.seed = cfg_.seed;
      meta.combo_id = in_.combo_id;
      meta.tokenizer_id = in_.tokenizer_id;
      meta.extra = {{"train_config", to_json(cfg_)}, {"sources", sources_}};
      nlohmann::json dev = nlohmann::json::array();
      for (const auto& e : result_.epochs) dev.push_back({{"epoch", e.epoch}, {"macro_f1", e.dev_macro_f1}, {"f1", e.dev_f1}});
      meta.extra["dev"] = dev;
    }
  }

  std::size_t steps_per_epoch(const std::vector<data::DomainDataset>& sets) const {
    const auto batches = data::single_domain_batches(sets, cfg_.batch_size, 0);
    if (family_ != Family::mldg) return batches.size();
    std::map<std::string, std::size_t> per_domain;
    for (const auto& b : batches) ++per_domain[b.domain];
    std::size_t rounds = 0;
    for (const auto& [d, n] : per_domain) rounds = std::max(rounds, n);
    return rounds;
  }

  std::optional<std::uint64_t> dropout_seed() {
    if (model_.config.dropout <= 0.0) return std::nullopt;
    return derive_seed(cfg_.seed, 0xd00000 + global_step_);
  }

  BatchObjective objective_for(std::vector<const data::Window*> windows) {
    BatchObjective obj(model_.config, std::move(windows), teacher_ ? TaskLoss::kd : TaskLoss::span_ce, cfg_.tau,
                       teacher_);
    if (auto s = dropout_seed()) obj.set_dropout_seed(*s);
    return obj;
  }

  LossBreakdown step_gradient(const data::Batch& b, model::ParameterSet& grad, StepRecord& rec) {
    if (family_ == Family::episodic) {
      auto step = episodic_step(model_, *in_.companions, b, cfg_, rng_, sources_, teacher_);
      grad = std::move(step.gradient);
      rec.episode = step.draw;
      return step.loss;
    }
    auto obj = objective_for(b.windows);
    if (family_ == Family::adversarial) obj.set_adversarial({cfg_.lambda_adv, domain_index_});
    return obj.evaluate(model_.params, &grad);
  }

  template <class Apply>
  void mldg_epoch(const std::vector<data::Batch>& batches, Apply&& apply) {
    std::map<std::string, std::deque<const data::Batch*>> queues;
    for (const auto& b : batches) queues[b.domain].push_back(&b);
    for (;;) {
      std::vector<const data::Batch*> round;
      for (auto& [d, q] : queues) {
        if (q.empty()) continue;
        round.push_back(q.front());
        q.pop_front();
      }
      if (round.empty()) break;
      StepRecord rec;
      model::ParameterSet grad;
      if (round.size() == 1) {
        rec.domain = round.front()->domain;
        rec.loss = objective_for(round.front()->windows).evaluate(model_.params, &grad);
        apply(std::move(rec), grad);
        continue;
      }
      const std::size_t test_i = rng_.index(round.size());
      std::vector<const data::Window*> tr_windows;
      std::string tr_domains;
      for (std::size_t i = 0; i < round.size(); ++i) {
        if (i == test_i) continue;
        tr_windows.insert(tr_windows.end(), round[i]->windows.begin(), round[i]->windows.end());
        tr_domains += (tr_domains.empty() ? "" : "+") + round[i]->domain;
      }
      const auto tr = objective_for(std::move(tr_windows));
      const auto te = objective_for(round[test_i]->windows);
      auto meta = mldg_meta_gradient(tr, te, model_.params, cfg_.alpha(), cfg_.beta, cfg_.first_order_mldg);
      rec.domain = tr_domains;
      rec.meta_test_domain = round[test_i]->domain;
      rec.loss.task = meta.train_loss;
      rec.loss.total = meta.meta_objective;
      rec.meta_test_loss = meta.test_loss;
      apply(std::move(rec), meta.gradient);
    }
  }

  TrainConfig cfg_;
  const TrainInputs& in_;
  const TrainHooks& hooks_;
  Family family_;
  Rng rng_;
  const TeacherLogitCache* teacher_ = nullptr;
  std::vector<std::string> sources_;
  std::map<std::string, std::size_t> domain_index_;
  model::SpanModel model_;
  TrainResult result_;
  std::size_t global_step_ = 0;
};

void require_method(const TrainConfig& cfg, std::initializer_list<Method> allowed, const char* trainer) {
  if (std::find(allowed.begin(), allowed.end(), cfg.method) == allowed.end()) {
    throw Error(std::string(trainer) + " cannot run method " + std::string(to_string(cfg.method)));
  }
}

}  // namespace

nlohmann::json to_json(const StepRecord& r) {
  nlohmann::json j = {{"step", r.step},
                      {"epoch", r.epoch},
                      {"stage", r.stage},
                      {"domain", r.domain},
                      {"loss", {{"total", r.loss.total}, {"task", r.loss.task}}},
                      {"lr", r.lr}};
  if (r.loss.domain != 0.0) j["loss"]["domain"] = r.loss.domain;
  if (r.episode) {
    j["loss"]["episodic"] = r.loss.episodic;
    j["episode"] = {{"split_layer", r.episode->split_layer},
                    {"trainable_side", r.episode->trainable_side == model::SplitSide::lower ? "lower" : "upper"},
                    {"donor", r.episode->donor_domain}};
  }
  if (r.meta_test_domain) {
    j["meta_test_domain"] = *r.meta_test_domain;
    j["loss"]["meta_test"] = r.meta_test_loss;
  }
  return j;
}

TrainResult train_model(const TrainConfig& cfg, const TrainInputs& inputs, const TrainHooks& hooks) {
  return Run(cfg, inputs, hooks).run();
}

TrainResult train_erm(const TrainConfig& cfg, const TrainInputs& inputs, const TrainHooks& hooks) {
  require_method(cfg, {Method::erm}, "train_erm");
  return train_model(cfg, inputs, hooks);
}

TrainResult train_kd(const TrainConfig& cfg, const TrainInputs& inputs, const TrainHooks& hooks) {
  require_method(cfg, {Method::kd_gold}, "train_kd");
  return train_model(cfg, inputs, hooks);
}

TrainResult train_kd_augmented(const TrainConfig& cfg, const TrainInputs& inputs, const TrainHooks& hooks) {
  require_method(cfg, {Method::kd_aug}, "train_kd_augmented");
  return train_model(cfg, inputs, hooks);
}

TrainResult train_domain_adversarial(const TrainConfig& cfg, const TrainInputs& inputs, const TrainHooks& hooks) {
  require_method(cfg, {Method::domain_adv}, "train_domain_adversarial");
  return train_model(cfg, inputs, hooks);
}

TrainResult train_episodic(const TrainConfig& cfg, const TrainInputs& inputs, const TrainHooks& hooks) {
  require_method(cfg, {Method::episodic}, "train_episodic");
  return train_model(cfg, inputs, hooks);
}

TrainResult train_mldg(const TrainConfig& cfg, const TrainInputs& inputs, const TrainHooks& hooks) {
  require_method(cfg, {Method::mldg}, "train_mldg");
  return train_model(cfg, inputs, hooks);
}

TrainResult train_kd_with_dil(const TrainConfig& cfg, const TrainInputs& inputs, const TrainHooks& hooks) {
  require_method(cfg, {Method::kd_domain_adv, Method::kd_episodic, Method::kd_mldg}, "train_kd_with_dil");
  return train_model(cfg, inputs, hooks);
}

CompanionBank train_companions(const TrainConfig& cfg, const TrainInputs& inputs) {
  CompanionBank bank;
  TrainConfig c = cfg;
  c.method = Method::erm;
  for (const auto& ds : inputs.train) {
    TrainInputs single;
    single.train = {ds};
    for (const auto& dev : inputs.dev) {
      if (dev.name == ds.name) single.dev.push_back(dev);
    }
    single.model_config = inputs.model_config;
    single.combo_id = ds.name;
    single.tokenizer_id = inputs.tokenizer_id;
    bank.models.emplace(ds.name, train_model(c, single).checkpoint.model);
  }
  return bank;
}

}  // namespace dgkd::train
