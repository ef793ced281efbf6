// Copyright 2026 The dgkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "dgkd/train/losses.hpp"

#include <algorithm>
#include <cmath>

#include "dgkd/core/error.hpp"
#include "dgkd/data/windowing.hpp"

namespace dgkd::train {
namespace {

double masked_ce(const std::vector<double>& logits, std::size_t target, const std::vector<std::uint8_t>& mask) {
  double mx = -INFINITY;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (mask[i]) mx = std::max(mx, logits[i]);
  }
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (mask[i]) z += std::exp(logits[i] - mx);
  }
  return std::log(z) + mx - logits[target];
}

}  // namespace

double kd_loss(std::span<const double> student, std::span<const double> teacher, double tau) {
  if (student.size() != teacher.size()) throw Error("kd_loss: student and teacher logits differ in length");
  if (!(tau > 0.0)) throw Error("kd_loss: tau must be positive");
  double s = 0.0;
  for (std::size_t i = 0; i < student.size(); ++i) {
    const double d = student[i] - teacher[i] / tau;
    s += d * d;
  }
  return s;
}

double span_kd_loss(const model::SpanLogits& student, const model::SpanLogits& teacher, double tau) {
  return kd_loss(student.start, teacher.start, tau) + kd_loss(student.end, teacher.end, tau);
}

double span_cross_entropy(const model::SpanLogits& logits, const data::Window& window) {
  if (!window.label) throw Error("window " + window.window_id + " has no gold span");
  const auto mask = data::token_mask(window);
  return 0.5 * (masked_ce(logits.start, window.label->start, mask) + masked_ce(logits.end, window.label->end, mask));
}

std::vector<double> grad_reverse(std::span<const double> upstream, double lambda) {
  if (lambda < 0.0) throw Error("grad_reverse: lambda must be >= 0");
  std::vector<double> out(upstream.size());
  std::transform(upstream.begin(), upstream.end(), out.begin(), [lambda](double g) { return -lambda * g; });
  return out;
}

}  // namespace dgkd::train
