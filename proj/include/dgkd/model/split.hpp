// Copyright 2026 The dgkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "dgkd/model/encoder.hpp"

namespace dgkd::model {

enum class SplitSide { lower, upper };

/// Partition of parameter groups after transformer layer k. Embeddings
/// always sit on the lower side and heads on the upper side.
struct ParameterSplit {
  std::size_t split_layer = 1;
  std::vector<std::string> lower;
  std::vector<std::string> upper;
  SplitSide trainable_side = SplitSide::lower;

  const std::vector<std::string>& trainable() const { return trainable_side == SplitSide::lower ? lower : upper; }
  const std::vector<std::string>& frozen() const { return trainable_side == SplitSide::lower ? upper : lower; }
  bool is_trainable(const std::string& group) const;
};

/// Requires 1 <= k <= L−1.
ParameterSplit split_parameters(const SpanModel& model, std::size_t k, SplitSide trainable_side);

}  // namespace dgkd::model
