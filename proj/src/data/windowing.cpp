// Copyright 2026 The dgkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "dgkd/data/windowing.hpp"

#include <algorithm>
#include <fstream>
#include <nlohmann/json.hpp>

#include "dgkd/core/error.hpp"

namespace dgkd::data {
namespace {

using nlohmann::json;

// Inclusive token range overlapping the char span, if any.
std::optional<SpanLabel> char_span_to_tokens(const std::vector<Token>& tokens, const AnswerSpan& span) {
  std::optional<std::size_t> first, last;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].begin < span.end && tokens[i].end > span.start) {
      if (!first) first = i;
      last = i;
    }
  }
  if (!first) return std::nullopt;
  return SpanLabel{*first, *last};
}

}  // namespace

DomainDataset make_windows(DomainDataset ds, const Tokenizer& tokenizer, const WindowOptions& options) {
  if (options.effective_stride() == 0 || options.effective_stride() >= options.max_len) {
    throw Error("window stride must be in [1, max_len)");
  }
  ds.windows.clear();
  for (const auto& ex : ds.examples) {
    const auto q_tokens = tokenizer.split(ex.question);
    const auto p_tokens = tokenizer.split(ex.passage);
    if (q_tokens.size() + 4 > options.max_len) {
      throw Error("qid " + ex.qid + ": question of " + std::to_string(q_tokens.size()) +
                  " tokens leaves no room for passage tokens within max_len " + std::to_string(options.max_len));
    }
    if (p_tokens.empty()) continue;
    const auto q_ids = tokenizer.encode(q_tokens);
    const auto p_ids = tokenizer.encode(p_tokens);

    std::vector<SpanLabel> answer_tokens;
    for (const auto& span : ex.answer_spans) {
      if (auto t = char_span_to_tokens(p_tokens, span)) answer_tokens.push_back(*t);
    }

    const std::size_t chunk = options.max_len - q_tokens.size() - 3;
    const std::size_t step = std::min(options.effective_stride(), chunk);
    for (std::size_t start = 0;; start += step) {
      const std::size_t stop = std::min(start + chunk, p_tokens.size());
      Window w;
      w.qid = ex.qid;
      w.domain = ex.domain;
      w.window_id = ex.qid + "@" + std::to_string(start);
      w.token_ids.reserve(q_ids.size() + (stop - start) + 3);
      w.token_ids.push_back(kClsId);
      w.token_ids.insert(w.token_ids.end(), q_ids.begin(), q_ids.end());
      w.token_ids.push_back(kSepId);
      w.question_span = {1, 1 + q_ids.size()};
      const std::size_t p0 = w.token_ids.size();
      w.token_ids.insert(w.token_ids.end(), p_ids.begin() + static_cast<std::ptrdiff_t>(start),
                         p_ids.begin() + static_cast<std::ptrdiff_t>(stop));
      w.passage_span = {p0, p0 + (stop - start)};
      w.token_ids.push_back(kSepId);
      w.char_offsets.assign(w.token_ids.size(), {-1, -1});
      for (std::size_t i = start; i < stop; ++i) {
        w.char_offsets[p0 + i - start] = {static_cast<int>(p_tokens[i].begin), static_cast<int>(p_tokens[i].end)};
      }
      for (const auto& a : answer_tokens) {
        if (a.start >= start && a.end < stop) {
          w.label = SpanLabel{p0 + a.start - start, p0 + a.end - start};
          break;
        }
      }
      if (w.label || options.keep_unanswered) ds.windows.push_back(std::move(w));
      if (stop == p_tokens.size()) break;
    }
  }
  return ds;
}

Window pad_window(Window window, std::size_t length) {
  while (window.token_ids.size() < length) {
    window.token_ids.push_back(kPadId);
    window.char_offsets.emplace_back(-1, -1);
  }
  return window;
}

std::vector<std::uint8_t> token_mask(const Window& window) {
  std::vector<std::uint8_t> mask(window.token_ids.size());
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = window.token_ids[i] != kPadId ? 1 : 0;
  return mask;
}

std::string span_text(const RCExample& example, const Window& window, std::size_t start, std::size_t end) {
  if (!window.passage_span.contains(start) || !window.passage_span.contains(end) || end < start) {
    throw Error("span outside passage for window " + window.window_id);
  }
  const auto b = static_cast<std::size_t>(window.char_offsets[start].first);
  const auto e = static_cast<std::size_t>(window.char_offsets[end].second);
  return example.passage.substr(b, e - b);
}

namespace {

json example_to_json(const RCExample& ex) {
  json spans = json::array();
  for (const auto& s : ex.answer_spans) spans.push_back({s.start, s.end, s.text});
  return {{"qid", ex.qid},         {"question", ex.question}, {"passage", ex.passage},
          {"domain", ex.domain},   {"answers", ex.answers},   {"spans", spans}};
}

RCExample example_from_json(const json& j) {
  RCExample ex;
  ex.qid = j.at("qid").get<std::string>();
  ex.question = j.at("question").get<std::string>();
  ex.passage = j.at("passage").get<std::string>();
  ex.domain = j.at("domain").get<std::string>();
  ex.answers = j.at("answers").get<std::vector<std::string>>();
  for (const auto& s : j.at("spans")) {
    ex.answer_spans.push_back({s.at(0).get<std::size_t>(), s.at(1).get<std::size_t>(), s.at(2).get<std::string>()});
  }
  return ex;
}

json window_to_json(const Window& w) {
  json offsets = json::array();
  for (const auto& [b, e] : w.char_offsets) offsets.push_back({b, e});
  json j = {{"id", w.window_id},
            {"qid", w.qid},
            {"domain", w.domain},
            {"tokens", w.token_ids},
            {"offsets", offsets},
            {"q", {w.question_span.begin, w.question_span.end}},
            {"p", {w.passage_span.begin, w.passage_span.end}}};
  if (w.label) j["label"] = {w.label->start, w.label->end};
  return j;
}

Window window_from_json(const json& j) {
  Window w;
  w.window_id = j.at("id").get<std::string>();
  w.qid = j.at("qid").get<std::string>();
  w.domain = j.at("domain").get<std::string>();
  w.token_ids = j.at("tokens").get<std::vector<int>>();
  for (const auto& o : j.at("offsets")) w.char_offsets.emplace_back(o.at(0).get<int>(), o.at(1).get<int>());
  w.question_span = {j.at("q").at(0).get<std::size_t>(), j.at("q").at(1).get<std::size_t>()};
  w.passage_span = {j.at("p").at(0).get<std::size_t>(), j.at("p").at(1).get<std::size_t>()};
  if (j.contains("label")) w.label = SpanLabel{j["label"].at(0).get<std::size_t>(), j["label"].at(1).get<std::size_t>()};
  return w;
}

json meta_to_json(const WindowCacheMeta& m) {
  return {{"tokenizer_id", m.tokenizer_id},
          {"max_len", m.max_len},
          {"stride", m.stride},
          {"keep_unanswered", m.keep_unanswered}};
}

WindowCacheMeta meta_from_json(const json& j) {
  return {j.at("tokenizer_id").get<std::string>(), j.at("max_len").get<std::size_t>(),
          j.at("stride").get<std::size_t>(), j.at("keep_unanswered").get<bool>()};
}

json read_header(std::istream& in, const std::filesystem::path& path) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path.string() + ": empty window cache");
  json header;
  try {
    header = json::parse(line);
  } catch (const json::parse_error&) {
    throw FormatError(path.string() + ":1: malformed window cache header");
  }
  if (header.value("format", "") != "dgkd-window-cache") throw FormatError(path.string() + ": not a window cache");
  if (header.value("version", 0) != kWindowCacheVersion) {
    throw FormatError(path.string() + ": unsupported window cache version");
  }
  return header;
}

}  // namespace

void save_window_cache(const std::filesystem::path& path, const DomainDataset& ds, const WindowCacheMeta& meta) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  const json header = {{"format", "dgkd-window-cache"},  {"version", kWindowCacheVersion},
                       {"meta", meta_to_json(meta)},     {"dataset", ds.name},
                       {"split", to_string(ds.split)},   {"examples", ds.examples.size()},
                       {"windows", ds.windows.size()}};
  out << header.dump() << '\n';
  for (const auto& ex : ds.examples) out << example_to_json(ex).dump() << '\n';
  for (const auto& w : ds.windows) out << window_to_json(w).dump() << '\n';
}

WindowCacheMeta read_window_cache_meta(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingArtifact("cannot open window cache " + path.string());
  return meta_from_json(read_header(in, path).at("meta"));
}

DomainDataset load_window_cache(const std::filesystem::path& path, WindowCacheMeta* meta) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingArtifact("cannot open window cache " + path.string());
  const json header = read_header(in, path);
  if (meta != nullptr) *meta = meta_from_json(header.at("meta"));
  DomainDataset ds;
  ds.name = header.at("dataset").get<std::string>();
  ds.split = parse_split(header.at("split").get<std::string>());
  const auto n_examples = header.at("examples").get<std::size_t>();
  const auto n_windows = header.at("windows").get<std::size_t>();
  std::string line;
  std::size_t line_no = 1;
  try {
    for (std::size_t i = 0; i < n_examples; ++i, ++line_no) {
      if (!std::getline(in, line)) throw FormatError(path.string() + ": truncated window cache");
      ds.examples.push_back(example_from_json(json::parse(line)));
    }
    for (std::size_t i = 0; i < n_windows; ++i, ++line_no) {
      if (!std::getline(in, line)) throw FormatError(path.string() + ": truncated window cache");
      ds.windows.push_back(window_from_json(json::parse(line)));
    }
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ":" + std::to_string(line_no + 1) + ": " + e.what());
  }
  return ds;
}

}  // namespace dgkd::data
