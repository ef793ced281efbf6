// Copyright 2026 The dgkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "dgkd/data/types.hpp"
#include "dgkd/model/encoder.hpp"

namespace dgkd::eval {

struct ScoreRecord {
  std::string qid;
  std::string dataset;
  std::string prediction;
  double f1 = 0.0;
};

/// Predicts every example of `ds` and scores it against its gold answers.
std::vector<ScoreRecord> score_dataset(const model::SpanModel& model, const data::DomainDataset& ds,
                                       std::size_t max_answer_len);

double mean_f1(std::span<const ScoreRecord> records);

/// Dataset name → mean example F1.
std::map<std::string, double> dataset_f1(const model::SpanModel& model, std::span<const data::DomainDataset> sets,
                                         std::size_t max_answer_len);

}  // namespace dgkd::eval
