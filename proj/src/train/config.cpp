// Copyright 2026 The dgkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "dgkd/train/config.hpp"

#include <array>

#include "dgkd/core/error.hpp"

namespace dgkd::train {
namespace {

constexpr std::array<std::pair<Method, std::string_view>, 9> kNames{{
    {Method::erm, "erm"},
    {Method::kd_gold, "kd_gold"},
    {Method::kd_aug, "kd_aug"},
    {Method::domain_adv, "domain_adv"},
    {Method::episodic, "episodic"},
    {Method::mldg, "mldg"},
    {Method::kd_domain_adv, "kd_domain_adv"},
    {Method::kd_episodic, "kd_episodic"},
    {Method::kd_mldg, "kd_mldg"},
}};

}  // namespace

std::string_view to_string(Method method) {
  for (const auto& [m, name] : kNames) {
    if (m == method) return name;
  }
  throw Error("unknown method");
}

Method parse_method(std::string_view text) {
  for (const auto& [m, name] : kNames) {
    if (name == text) return m;
  }
  throw Error("unknown method '" + std::string(text) + "'");
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> methods = [] {
    std::vector<Method> out;
    for (const auto& entry : kNames) out.push_back(entry.first);
    return out;
  }();
  return methods;
}

bool uses_teacher(Method method) {
  switch (method) {
    case Method::kd_gold:
    case Method::kd_aug:
    case Method::kd_domain_adv:
    case Method::kd_episodic:
    case Method::kd_mldg:
      return true;
    default:
      return false;
  }
}

bool uses_companions(Method method) { return method == Method::episodic || method == Method::kd_episodic; }

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw Error("learning_rate must be positive");
  if (epochs == 0) throw Error("epochs must be >= 1");
  if (method == Method::kd_aug && synthetic_epochs == 0) throw Error("synthetic_epochs must be >= 1");
  if (batch_size == 0) throw Error("batch_size must be >= 1");
  if (!(tau > 0.0)) throw Error("tau must be positive");
  if (lambda_adv < 0.0) throw Error("lambda_adv must be >= 0");
  if (lambda_erm < 0.0 || lambda_erm > 1.0) throw Error("lambda_erm must lie in [0, 1]");
  if (beta < 0.0) throw Error("beta must be >= 0");
  if (inner_lr && !(*inner_lr > 0.0)) throw Error("inner_lr must be positive");
  if (max_answer_len == 0) throw Error("max_answer_len must be >= 1");
  if (optimizer.kind != "adamw") throw Error("unsupported optimizer '" + optimizer.kind + "'");
  if (optimizer.warmup_fraction < 0.0 || optimizer.warmup_fraction >= 1.0) {
    throw Error("warmup_fraction must lie in [0, 1)");
  }
}

TrainConfig TrainConfig::method_defaults(Method method) {
  TrainConfig cfg;
  cfg.method = method;
  cfg.epochs = 2;
  cfg.batch_size = 32;
  switch (method) {
    case Method::kd_gold:
      cfg.tau = 2.0;
      break;
    case Method::kd_aug:
      cfg.tau = 4.0;
      cfg.synthetic_epochs = 1;
      break;
    case Method::domain_adv:
      cfg.lambda_adv = 0.1;
      break;
    case Method::episodic:
      cfg.lambda_erm = 0.75;
      break;
    case Method::mldg:
      cfg.beta = 1.0;
      break;
    case Method::kd_domain_adv:
      cfg.tau = 1.0;
      cfg.lambda_adv = 0.01;
      break;
    case Method::kd_episodic:
      cfg.tau = 1.0;
      cfg.lambda_erm = 0.75;
      break;
    case Method::kd_mldg:
      cfg.tau = 4.0;
      cfg.beta = 1.0;
      break;
    case Method::erm:
      break;
  }
  return cfg;
}

nlohmann::json to_json(const TrainConfig& cfg) {
  nlohmann::json j = {{"method", to_string(cfg.method)},
                      {"learning_rate", cfg.learning_rate},
                      {"epochs", cfg.epochs},
                      {"synthetic_epochs", cfg.synthetic_epochs},
                      {"batch_size", cfg.batch_size},
                      {"seed", cfg.seed},
                      {"tau", cfg.tau},
                      {"lambda_adv", cfg.lambda_adv},
                      {"lambda_erm", cfg.lambda_erm},
                      {"beta", cfg.beta},
                      {"first_order_mldg", cfg.first_order_mldg},
                      {"max_answer_len", cfg.max_answer_len},
                      {"optimizer",
                       {{"kind", cfg.optimizer.kind},
                        {"beta1", cfg.optimizer.beta1},
                        {"beta2", cfg.optimizer.beta2},
                        {"eps", cfg.optimizer.eps},
                        {"weight_decay", cfg.optimizer.weight_decay},
                        {"warmup_fraction", cfg.optimizer.warmup_fraction}}}};
  if (cfg.inner_lr) j["inner_lr"] = *cfg.inner_lr;
  return j;
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig cfg;
  if (j.contains("method")) cfg.method = parse_method(j.at("method").get<std::string>());
  cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
  cfg.epochs = j.value("epochs", cfg.epochs);
  cfg.synthetic_epochs = j.value("synthetic_epochs", cfg.synthetic_epochs);
  cfg.batch_size = j.value("batch_size", cfg.batch_size);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.tau = j.value("tau", cfg.tau);
  cfg.lambda_adv = j.value("lambda_adv", cfg.lambda_adv);
  cfg.lambda_erm = j.value("lambda_erm", cfg.lambda_erm);
  cfg.beta = j.value("beta", cfg.beta);
  if (j.contains("inner_lr") && !j.at("inner_lr").is_null()) cfg.inner_lr = j.at("inner_lr").get<double>();
  cfg.first_order_mldg = j.value("first_order_mldg", cfg.first_order_mldg);
  cfg.max_answer_len = j.value("max_answer_len", cfg.max_answer_len);
  if (j.contains("optimizer")) {
    const auto& o = j.at("optimizer");
    cfg.optimizer.kind = o.value("kind", cfg.optimizer.kind);
    cfg.optimizer.beta1 = o.value("beta1", cfg.optimizer.beta1);
    cfg.optimizer.beta2 = o.value("beta2", cfg.optimizer.beta2);
    cfg.optimizer.eps = o.value("eps", cfg.optimizer.eps);
    cfg.optimizer.weight_decay = o.value("weight_decay", cfg.optimizer.weight_decay);
    cfg.optimizer.warmup_fraction = o.value("warmup_fraction", cfg.optimizer.warmup_fraction);
  }
  return cfg;
}

}  // namespace dgkd::train
