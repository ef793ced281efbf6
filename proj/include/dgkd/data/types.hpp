// Copyright 2026 The dgkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dgkd::data {

enum class Split { train, dev, test };

std::string_view to_string(Split split);
Split parse_split(std::string_view text);

/// Character span [start, end) into a passage together with its text.
struct AnswerSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string text;
};

/// One question/passage/answers record in MRQA form.
struct RCExample {
  std::string qid;
  std::string question;
  std::string passage;
  std::string domain;
  std::vector<std::string> answers;       // gold strings used for scoring
  std::vector<AnswerSpan> answer_spans;   // empty for synthetic examples
};

/// Half-open token index range.
struct TokenRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
  bool contains(std::size_t i) const { return i >= begin && i < end; }
  bool empty() const { return begin == end; }
};

struct SpanLabel {
  std::size_t start = 0;
  std::size_t end = 0;  // inclusive
};

/// Tokenized sliding-window view of one example:
///   [CLS] question [SEP] passage-chunk [SEP] (optionally followed by [PAD]).
struct Window {
  std::string window_id;
  std::string qid;
  std::string domain;
  std::vector<int> token_ids;
  /// Per-token char span into the passage; {-1, -1} outside passage_span.
  std::vector<std::pair<int, int>> char_offsets;
  TokenRange question_span;
  TokenRange passage_span;
  std::optional<SpanLabel> label;

  std::size_t length() const { return token_ids.size(); }
  bool labeled() const { return label.has_value(); }
};

struct DomainDataset {
  std::string name;
  Split split = Split::train;
  std::vector<RCExample> examples;
  std::vector<Window> windows;
};

/// One leave-one-out training combination.
struct Combo {
  std::string id;
  std::string held_out;
  std::vector<std::string> sources;
};

struct LeaveOneOutPlan {
  std::vector<std::string> source_names;
  std::vector<Combo> combos;
};

/// Collapses whitespace runs to one space and trims both ends.
std::string normalize_whitespace(std::string_view text);

}  // namespace dgkd::data
