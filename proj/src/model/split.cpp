// Copyright 2026 The dgkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "dgkd/model/split.hpp"

#include <algorithm>

#include "dgkd/core/error.hpp"

namespace dgkd::model {

bool ParameterSplit::is_trainable(const std::string& group) const {
  const auto& t = trainable();
  return std::find(t.begin(), t.end(), group) != t.end();
}

ParameterSplit split_parameters(const SpanModel& model, std::size_t k, SplitSide trainable_side) {
  const std::size_t layers = model.config.num_layers;
  if (k < 1 || k + 1 > layers) {
    throw Error("split layer " + std::to_string(k) + " outside [1, " + std::to_string(layers) + "-1]");
  }
  ParameterSplit split;
  split.split_layer = k;
  split.trainable_side = trainable_side;
  for (const auto& group : model.params.groups()) {
    bool lower = group == "embeddings";
    if (group.rfind("block", 0) == 0) lower = std::stoul(group.substr(5)) <= k;
    (lower ? split.lower : split.upper).push_back(group);
  }
  return split;
}

}  // namespace dgkd::model
