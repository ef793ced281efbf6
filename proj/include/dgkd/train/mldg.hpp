// Copyright 2026 The dgkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "dgkd/model/parameters.hpp"
#include "dgkd/train/objective.hpp"

namespace dgkd::train {

struct MetaGradient {
  model::ParameterSet gradient;  // ∇F
  double meta_objective = 0.0;   // F = L_tr(θ) + β·L_te(θ′)
  double train_loss = 0.0;       // L_tr(θ)
  double test_loss = 0.0;        // L_te(θ′)
  model::ParameterSet adapted;   // θ′
};

/// θ′ = θ − α∇L_tr(θ); F(θ) = L_tr(θ) + β·L_te(θ′).
/// Full form: ∇F = g_tr + β(I − αH_tr)g′_te, with H_tr·v by forward-over-reverse.
/// First-order form drops the αH_tr term.
MetaGradient mldg_meta_gradient(const Objective& meta_train, const Objective& meta_test,
                                const model::ParameterSet& params, double alpha, double beta, bool first_order);

}  // namespace dgkd::train
