// Copyright 2026 The dgkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "dgkd/model/decode.hpp"

#include <algorithm>
#include <unordered_map>

#include "dgkd/core/error.hpp"
#include "dgkd/data/windowing.hpp"

namespace dgkd::model {

DecodedSpan decode_span(const SpanLogits& logits, const data::Window& window, std::size_t max_answer_len) {
  if (max_answer_len == 0) throw Error("max_answer_len must be >= 1");
  const auto& ps = window.passage_span;
  if (ps.empty()) throw Error("window " + window.window_id + " has an empty passage span");
  if (logits.start.size() < ps.end || logits.end.size() < ps.end) throw Error("logits shorter than window");
  DecodedSpan best{ps.begin, ps.begin, logits.start[ps.begin] + logits.end[ps.begin]};
  for (std::size_t i = ps.begin; i < ps.end; ++i) {
    const std::size_t last = std::min(ps.end, i + max_answer_len);
    for (std::size_t j = i; j < last; ++j) {
      const double s = logits.start[i] + logits.end[j];
      if (s > best.score) best = {i, j, s};
    }
  }
  return best;
}

std::map<std::string, Prediction> predict_dataset(const SpanModel& model, const data::DomainDataset& ds,
                                                  std::size_t max_answer_len) {
  std::unordered_map<std::string, const data::RCExample*> by_qid;
  for (const auto& ex : ds.examples) by_qid.emplace(ex.qid, &ex);
  std::map<std::string, Prediction> out;
  std::unordered_map<std::string, bool> seen;
  for (const auto& ex : ds.examples) out.emplace(ex.qid, Prediction{});
  for (const auto& w : ds.windows) {
    const auto it = by_qid.find(w.qid);
    if (it == by_qid.end()) continue;
    const auto span = decode_span(forward_span(model, w), w, max_answer_len);
    auto& pred = out[w.qid];
    if (!seen[w.qid] || span.score > pred.score) {
      pred = {data::span_text(*it->second, w, span.start, span.end), span.score};
      seen[w.qid] = true;
    }
  }
  return out;
}

}  // namespace dgkd::model
