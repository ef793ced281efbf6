// Copyright 2026 The dgkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "dgkd/model/parameters.hpp"
#include "dgkd/train/config.hpp"

namespace dgkd::train {

/// Linear warmup over the first warmup_fraction of steps, then linear decay.
class LinearSchedule {
 public:
  LinearSchedule(double peak, std::size_t total_steps, double warmup_fraction);
  double at(std::size_t step) const;
  std::size_t total_steps() const { return total_; }

 private:
  double peak_;
  std::size_t total_;
  std::size_t warmup_;
};

/// Adam with decoupled weight decay. Decay applies to matrices with more
/// than one row (weights and embeddings), not to biases or norm gains.
class AdamW {
 public:
  AdamW(const model::ParameterSet& like, const OptimizerSettings& settings, LinearSchedule schedule);

  /// Applies one update in place and returns the learning rate used.
  double step(model::ParameterSet& params, const model::ParameterSet& grad);
  std::size_t steps_taken() const { return t_; }

 private:
  OptimizerSettings settings_;
  LinearSchedule schedule_;
  model::ParameterSet m_;
  model::ParameterSet v_;
  std::size_t t_ = 0;
};

}  // namespace dgkd::train
