// Copyright 2026 The dgkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "dgkd/eval/scoring.hpp"

#include "dgkd/core/error.hpp"
#include "dgkd/eval/metrics.hpp"
#include "dgkd/model/decode.hpp"

namespace dgkd::eval {

std::vector<ScoreRecord> score_dataset(const model::SpanModel& model, const data::DomainDataset& ds,
                                       std::size_t max_answer_len) {
  const auto predictions = model::predict_dataset(model, ds, max_answer_len);
  std::vector<ScoreRecord> out;
  out.reserve(ds.examples.size());
  for (const auto& ex : ds.examples) {
    const auto& pred = predictions.at(ex.qid).text;
    out.push_back({ex.qid, ds.name, pred, example_f1(pred, ex.answers)});
  }
  return out;
}

double mean_f1(std::span<const ScoreRecord> records) {
  if (records.empty()) throw Error("mean F1 over no examples");
  double s = 0.0;
  for (const auto& r : records) s += r.f1;
  return s / static_cast<double>(records.size());
}

std::map<std::string, double> dataset_f1(const model::SpanModel& model, std::span<const data::DomainDataset> sets,
                                         std::size_t max_answer_len) {
  std::map<std::string, double> out;
  for (const auto& ds : sets) out[ds.name] = mean_f1(score_dataset(model, ds, max_answer_len));
  return out;
}

}  // namespace dgkd::eval
