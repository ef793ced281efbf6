// Copyright 2026 The dgkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include "dgkd/data/types.hpp"
#include "dgkd/model/encoder.hpp"

namespace dgkd::train {

/// ‖z_s − z_t/τ‖². Only the teacher logits are divided by τ.
double kd_loss(std::span<const double> student, std::span<const double> teacher, double tau);

/// kd_loss summed over the start and end heads.
double span_kd_loss(const model::SpanLogits& student, const model::SpanLogits& teacher, double tau);

/// Mean of start and end cross-entropy over the window's non-padding positions.
double span_cross_entropy(const model::SpanLogits& logits, const data::Window& window);

/// Backward rule of the gradient reversal layer: −λ·g.
std::vector<double> grad_reverse(std::span<const double> upstream, double lambda);

}  // namespace dgkd::train
