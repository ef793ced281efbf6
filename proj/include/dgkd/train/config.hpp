// Copyright 2026 The dgkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dgkd::train {

enum class Method { erm, kd_gold, kd_aug, domain_adv, episodic, mldg, kd_domain_adv, kd_episodic, kd_mldg };

std::string_view to_string(Method method);
Method parse_method(std::string_view text);
const std::vector<Method>& all_methods();

/// Methods whose task loss is logit matching against cached teacher logits.
bool uses_teacher(Method method);
/// Episodic methods need a companion bank.
bool uses_companions(Method method);

struct OptimizerSettings {
  std::string kind = "adamw";
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
  double warmup_fraction = 0.1;
};

struct TrainConfig {
  Method method = Method::erm;
  double learning_rate = 5e-4;
  std::size_t epochs = 2;            // gold epochs (stage 2 for kd_aug)
  std::size_t synthetic_epochs = 1;  // stage 1 for kd_aug
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  double tau = 1.0;
  double lambda_adv = 0.1;
  double lambda_erm = 0.75;
  double beta = 1.0;
  std::optional<double> inner_lr;  // MLDG α; the outer learning rate when unset
  bool first_order_mldg = false;
  std::size_t max_answer_len = 30;
  OptimizerSettings optimizer;

  double lambda_episodic() const { return 1.0 - lambda_erm; }
  double alpha() const { return inner_lr.value_or(learning_rate); }

  /// Throws on out-of-range fields.
  void validate() const;

  /// Default hyperparameters for `method`.
  static TrainConfig method_defaults(Method method);
};

nlohmann::json to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::json& j);

}  // namespace dgkd::train
