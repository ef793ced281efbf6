// Copyright 2026 The dgkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "dgkd/train/mldg.hpp"

#include "dgkd/core/error.hpp"

namespace dgkd::train {

MetaGradient mldg_meta_gradient(const Objective& meta_train, const Objective& meta_test,
                                const model::ParameterSet& params, double alpha, double beta, bool first_order) {
  if (!(alpha > 0.0)) throw Error("MLDG inner step size must be positive");
  if (beta < 0.0) throw Error("MLDG beta must be >= 0");
  MetaGradient out;
  model::ParameterSet g_tr;
  out.train_loss = meta_train.value_and_gradient(params, &g_tr);
  out.adapted = params;
  model::axpy(out.adapted, -alpha, g_tr);

  out.gradient = g_tr;
  if (beta == 0.0) {
    out.test_loss = meta_test.value_and_gradient(out.adapted, nullptr);
    out.meta_objective = out.train_loss;
    return out;
  }
  model::ParameterSet g_te;
  out.test_loss = meta_test.value_and_gradient(out.adapted, &g_te);
  out.meta_objective = out.train_loss + beta * out.test_loss;
  model::axpy(out.gradient, beta, g_te);
  if (!first_order) {
    const auto hv = meta_train.hessian_vector(params, g_te);
    model::axpy(out.gradient, -beta * alpha, hv);
  }
  return out;
}

}  // namespace dgkd::train
