// Copyright 2026 The dgkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>

#include "dgkd/data/types.hpp"
#include "dgkd/model/encoder.hpp"

namespace dgkd::model {

inline constexpr std::size_t kDefaultMaxAnswerLen = 30;

struct DecodedSpan {
  std::size_t start = 0;
  std::size_t end = 0;  // inclusive
  double score = 0.0;
};

/// Best (i, j) by start[i] + end[j] with i <= j <= i + max_answer_len − 1,
/// both inside the passage span. Ties go to the smaller i, then smaller j.
DecodedSpan decode_span(const SpanLogits& logits, const data::Window& window,
                        std::size_t max_answer_len = kDefaultMaxAnswerLen);

struct Prediction {
  std::string text;
  double score = 0.0;
};

/// Per-example answers: the best-scoring span across each example's windows
/// (earlier window wins ties). Examples without windows predict "".
std::map<std::string, Prediction> predict_dataset(const SpanModel& model, const data::DomainDataset& ds,
                                                  std::size_t max_answer_len = kDefaultMaxAnswerLen);

}  // namespace dgkd::model
