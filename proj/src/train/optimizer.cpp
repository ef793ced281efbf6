// Copyright 2026 The dgkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "dgkd/train/optimizer.hpp"

#include <algorithm>
#include <cmath>

namespace dgkd::train {

LinearSchedule::LinearSchedule(double peak, std::size_t total_steps, double warmup_fraction)
    : peak_(peak),
      total_(std::max<std::size_t>(total_steps, 1)),
      warmup_(static_cast<std::size_t>(std::ceil(warmup_fraction * static_cast<double>(total_)))) {
  warmup_ = std::min(warmup_, total_ - 1);
}

double LinearSchedule::at(std::size_t step) const {
  if (step < warmup_) return peak_ * static_cast<double>(step + 1) / static_cast<double>(warmup_ + 1);
  if (step >= total_) return peak_ / static_cast<double>(total_ - warmup_);
  return peak_ * static_cast<double>(total_ - step) / static_cast<double>(total_ - warmup_);
}

AdamW::AdamW(const model::ParameterSet& like, const OptimizerSettings& settings, LinearSchedule schedule)
    : settings_(settings), schedule_(schedule), m_(model::zeros_like(like)), v_(model::zeros_like(like)) {}

double AdamW::step(model::ParameterSet& params, const model::ParameterSet& grad) {
  const double lr = schedule_.at(t_);
  ++t_;
  const double b1 = settings_.beta1, b2 = settings_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i].value;
    const auto& g = grad[i].value;
    auto& m = m_[i].value;
    auto& v = v_[i].value;
    const double decay = p.rows() > 1 ? settings_.weight_decay : 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
      m[k] = b1 * m[k] + (1.0 - b1) * g[k];
      v[k] = b2 * v[k] + (1.0 - b2) * g[k] * g[k];
      const double update = (m[k] / c1) / (std::sqrt(v[k] / c2) + settings_.eps);
      p[k] -= lr * (update + decay * p[k]);
    }
  }
  return lr;
}

}  // namespace dgkd::train
