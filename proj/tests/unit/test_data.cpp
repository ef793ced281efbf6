// Copyright 2026 The dgkd Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>
#include <zlib.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "dgkd/core/error.hpp"
#include "dgkd/core/rng.hpp"
#include "dgkd/data/balancing.hpp"
#include "dgkd/data/mrqa.hpp"
#include "dgkd/data/tokenizer.hpp"
#include "dgkd/data/windowing.hpp"

using namespace dgkd;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_lines(const fs::path& path, const std::vector<std::string>& lines) {
  std::ofstream out(path);
  for (const auto& l : lines) out << l << '\n';
}

data::RCExample make_example(const std::string& qid, const std::string& question, const std::string& passage,
                             const std::string& answer, std::size_t occurrence = 0) {
  data::RCExample ex;
  ex.qid = qid;
  ex.domain = "d";
  ex.question = question;
  ex.passage = passage;
  ex.answers = {answer};
  std::size_t at = passage.find(answer);
  for (std::size_t i = 0; i < occurrence; ++i) at = passage.find(answer, at + 1);
  ex.answer_spans.push_back({at, at + answer.size(), answer});
  return ex;
}

data::WordTokenizer tokenizer_for(const std::vector<data::RCExample>& examples) {
  std::vector<std::string> corpus;
  for (const auto& ex : examples) {
    corpus.push_back(ex.question);
    corpus.push_back(ex.passage);
  }
  return data::WordTokenizer::build(corpus);
}

data::DomainDataset dataset_of(std::string name, std::vector<data::RCExample> examples) {
  data::DomainDataset ds;
  ds.name = std::move(name);
  for (auto& ex : examples) ex.domain = ds.name;
  ds.examples = std::move(examples);
  return ds;
}

data::DomainDataset counted(const std::string& name, std::size_t n) {
  std::vector<data::RCExample> exs;
  for (std::size_t i = 0; i < n; ++i) {
    exs.push_back(make_example(name + std::to_string(i), "q", "w" + std::to_string(i) + " x", "x"));
  }
  return dataset_of(name, exs);
}

data::DomainDataset windowed(const std::string& name, std::size_t n_windows) {
  data::DomainDataset ds;
  ds.name = name;
  for (std::size_t i = 0; i < n_windows; ++i) {
    data::Window w;
    w.qid = name + std::to_string(i);
    w.window_id = w.qid + "@0";
    w.domain = name;
    ds.windows.push_back(w);
  }
  return ds;
}

}  // namespace

TEST_CASE("MRQA loader emits one example per question") {
  TempDir tmp("dgkd_mrqa_basic");
  const auto path = tmp.path / "news.jsonl";
  write_lines(path, {R"({"header": {"dataset": "NewsQA", "split": "train"}})",
                     R"({"context": "Ada lives in Oslo .", "qas": [)"
                     R"({"qid": "q1", "question": "Where?", "answers": ["Oslo"],)"
                     R"( "detected_answers": [{"text": "Oslo", "char_spans": [[13, 16]]}]},)"
                     R"({"qid": "q2", "question": "Who?", "answers": ["Ada"],)"
                     R"( "detected_answers": [{"text": "Ada", "char_spans": [[0, 2]]}]}]})"});
  const auto ds = data::load_mrqa_jsonl(path, data::Split::train);
  CHECK(ds.name == "NewsQA");
  REQUIRE(ds.examples.size() == 2);
  CHECK(ds.examples[0].answer_spans.at(0).start == 13);
  CHECK(ds.examples[0].answer_spans.at(0).end == 17);
  CHECK(ds.examples[1].answer_spans.at(0).text == "Ada");
  CHECK(ds.examples[1].domain == "NewsQA");
}

TEST_CASE("span text mismatches are repaired toward the offsets with one warning each") {
  TempDir tmp("dgkd_mrqa_repair");
  const auto path = tmp.path / "d.jsonl";
  const std::string context = "alpha beta gamma delta";
  write_lines(path, {R"({"context": "alpha beta gamma delta", "qas": [)"
                     R"({"qid": "a", "question": "?", "answers": ["beta"],)"
                     R"( "detected_answers": [{"text": "BETA!", "char_spans": [[6, 9]]}]},)"
                     R"({"qid": "b", "question": "?", "answers": ["gamma"],)"
                     R"( "detected_answers": [{"text": "gamma", "char_spans": [[11, 15]]}]},)"
                     R"({"qid": "c", "question": "?", "answers": ["delta"],)"
                     R"( "detected_answers": [{"text": "delt", "char_spans": [[17, 21]]}]}]})"});
  data::LoadReport report;
  const auto ds = data::load_mrqa_jsonl(path, data::Split::train, {}, &report);
  std::size_t mismatched = 0;
  for (const auto& ex : ds.examples) {
    const auto& s = ex.answer_spans.at(0);
    CHECK(s.text == context.substr(s.start, s.end - s.start));
  }
  // Oracle: direct slice comparison against the raw detected texts.
  const std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>> raw{
      {"BETA!", {6, 9}}, {"gamma", {11, 15}}, {"delt", {17, 21}}};
  for (const auto& [text, span] : raw) mismatched += context.substr(span.first, span.second - span.first + 1) != text;
  CHECK(report.warnings.size() == mismatched);
  CHECK(mismatched == 2);
}

TEST_CASE("MRQA loader errors name the line, the qid, and the file") {
  TempDir tmp("dgkd_mrqa_errors");
  const auto bad = tmp.path / "bad.jsonl";
  write_lines(bad, {R"({"context": "x", "qas": []})", "{not json"});
  try {
    data::load_mrqa_jsonl(bad, data::Split::train);
    FAIL("expected an error");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("bad.jsonl:2") != std::string::npos);
  }
  const auto unlabeled = tmp.path / "unlabeled.jsonl";
  write_lines(unlabeled, {R"({"context": "x y", "qas": [{"qid": "lonely", "question": "?", "answers": []}]})"});
  try {
    data::load_mrqa_jsonl(unlabeled, data::Split::dev);
    FAIL("expected an error");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("lonely") != std::string::npos);
  }
  data::LoadOptions opts;
  opts.allow_unanswered = true;
  CHECK(data::load_mrqa_jsonl(unlabeled, data::Split::train, opts).examples.size() == 1);

  const auto corrupt = tmp.path / "corrupt.jsonl.gz";
  {
    std::ofstream out(corrupt, std::ios::binary);
    out << "\x1f\x8b\x08\x00garbage-not-deflate";
  }
  try {
    data::load_mrqa_jsonl(corrupt, data::Split::train);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("corrupt.jsonl.gz") != std::string::npos);
  }
  CHECK_THROWS_AS(data::load_mrqa_jsonl(tmp.path / "absent.jsonl", data::Split::train), MissingArtifact);
}

TEST_CASE("gzip MRQA files round-trip") {
  TempDir tmp("dgkd_mrqa_gz");
  auto ds = dataset_of("Gz", {make_example("g1", "where ?", "ada lives in oslo", "oslo"),
                              make_example("g2", "who ?", "bo lives in rome", "bo")});
  ds.split = data::Split::dev;
  data::write_mrqa_jsonl(tmp.path / "gz.jsonl.gz", ds);
  const auto back = data::load_mrqa_jsonl(tmp.path / "gz.jsonl.gz", data::Split::dev);
  CHECK(back.name == "Gz");
  REQUIRE(back.examples.size() == 2);
  CHECK(back.examples[1].answer_spans.at(0).start == ds.examples[1].answer_spans.at(0).start);
  CHECK(back.examples[1].answer_spans.at(0).end == ds.examples[1].answer_spans.at(0).end);
}

TEST_CASE("a passage inside one window yields one labeled window") {
  const auto ex = make_example("q", "where does ada live", "ada lives in oslo now", "oslo");
  const auto tok = tokenizer_for({ex});
  const auto ds = data::make_windows(dataset_of("d", {ex}), tok, {32, 0, false});
  REQUIRE(ds.windows.size() == 1);
  const auto& w = ds.windows[0];
  REQUIRE(w.label);
  CHECK(data::span_text(ex, w, w.label->start, w.label->end) == "oslo");
  CHECK(w.question_span.end <= w.passage_span.begin);
}

TEST_CASE("training windows keep only those holding a full answer") {
  // 4 question tokens leave 16 − 7 = 9 passage tokens per window; stride 9.
  std::string passage;
  for (int i = 0; i < 27; ++i) passage += (i ? " " : "") + std::string("t") + std::to_string(i);
  const auto ex = make_example("q", "what is the token", passage, "t12 t13");
  const auto tok = tokenizer_for({ex});
  const auto all = data::make_windows(dataset_of("d", {ex}), tok, {16, 9, true});
  CHECK(all.windows.size() == 3);
  const auto train = data::make_windows(dataset_of("d", {ex}), tok, {16, 9, false});
  REQUIRE(train.windows.size() == 1);
  CHECK(train.windows[0].window_id == all.windows[1].window_id);

  const auto long_q = make_example("toolong", "a b c d e f g h i j k l m n", passage, "t1");
  CHECK_THROWS_WITH_AS(data::make_windows(dataset_of("d", {long_q}), tokenizer_for({long_q}), {16, 8, false}),
                       doctest::Contains("toolong"), Error);
  CHECK_THROWS_AS(data::make_windows(dataset_of("d", {ex}), tok, {16, 16, false}), Error);
}

TEST_CASE("every training window label matches a gold answer (exhaustive scan)") {
  Rng rng(31);
  const std::vector<std::string> vocab{"red", "blue", "oslo", "rome", "cat", "dog", "one", "two", "ran", "sat"};
  std::vector<data::RCExample> examples;
  for (int i = 0; i < 200; ++i) {
    const std::size_t n = 5 + rng.index(40);
    std::vector<std::string> words;
    std::string passage;
    for (std::size_t j = 0; j < n; ++j) {
      words.push_back(vocab[rng.index(vocab.size())]);
      passage += (j ? " " : "") + words.back();
    }
    const std::size_t len = 1 + rng.index(3), start = rng.index(n - std::min(len, n) + 1);
    std::string answer;
    for (std::size_t j = start; j < std::min(n, start + len); ++j) answer += (j > start ? " " : "") + words[j];
    std::size_t occurrence = 0, at = passage.find(answer);
    std::size_t char_start = 0;
    for (std::size_t j = 0; j < start; ++j) char_start += words[j].size() + 1;
    while (at != char_start) {
      at = passage.find(answer, at + 1);
      ++occurrence;
    }
    examples.push_back(make_example("r" + std::to_string(i), "which words here", passage, answer, occurrence));
  }
  const auto tok = tokenizer_for(examples);
  const auto ds = dataset_of("rand", examples);
  const auto train = data::make_windows(ds, tok, {16, 5, false});
  const auto all = data::make_windows(ds, tok, {16, 5, true});

  std::map<std::string, const data::RCExample*> by_qid;
  for (const auto& ex : train.examples) by_qid[ex.qid] = &ex;
  // Oracle: a window holds an answer iff the span's char range lies inside
  // the window's passage char range.
  std::size_t expected = 0;
  for (const auto& w : all.windows) {
    const auto& ex = *by_qid.at(w.qid);
    const auto lo = static_cast<std::size_t>(w.char_offsets[w.passage_span.begin].first);
    const auto hi = static_cast<std::size_t>(w.char_offsets[w.passage_span.end - 1].second);
    bool holds = false;
    for (const auto& s : ex.answer_spans) holds = holds || (s.start >= lo && s.end <= hi);
    expected += holds;
  }
  CHECK(train.windows.size() == expected);
  for (const auto& w : train.windows) {
    REQUIRE(w.label);
    const auto& ex = *by_qid.at(w.qid);
    CHECK(w.label->start <= w.label->end);
    CHECK(w.passage_span.contains(w.label->start));
    CHECK(w.passage_span.contains(w.label->end));
    const auto text = data::normalize_whitespace(data::span_text(ex, w, w.label->start, w.label->end));
    bool matches = false;
    for (const auto& a : ex.answers) matches = matches || data::normalize_whitespace(a) == text;
    CHECK(matches);
  }
}

TEST_CASE("window caches round-trip with their metadata") {
  TempDir tmp("dgkd_window_cache");
  const auto ex = make_example("q", "where does ada live", "ada lives in oslo now", "oslo");
  const auto tok = tokenizer_for({ex});
  const auto ds = data::make_windows(dataset_of("d", {ex}), tok, {32, 0, true});
  const data::WindowCacheMeta meta{tok.id(), 32, 16, true};
  data::save_window_cache(tmp.path / "c.jsonl", ds, meta);
  data::WindowCacheMeta got;
  const auto back = data::load_window_cache(tmp.path / "c.jsonl", &got);
  CHECK(got.tokenizer_id == tok.id());
  CHECK(got.stride == 16);
  REQUIRE(back.windows.size() == ds.windows.size());
  CHECK(back.windows[0].token_ids == ds.windows[0].token_ids);
  CHECK(back.windows[0].label->start == ds.windows[0].label->start);
  CHECK(back.examples[0].answer_spans[0].end == ex.answer_spans[0].end);
}

TEST_CASE("upsampling equalizes example counts") {
  const auto out = data::upsample_domains({counted("a", 3), counted("b", 5)}, 9);
  CHECK(out[0].examples.size() == 5);
  CHECK(out[1].examples.size() == 5);
  std::set<std::string> qids;
  for (const auto& ex : out[0].examples) qids.insert(ex.qid);
  CHECK(qids == std::set<std::string>{"a0", "a1", "a2"});
  for (std::size_t i = 0; i < 3; ++i) CHECK(out[0].examples[i].qid == "a" + std::to_string(i));

  const auto same = data::upsample_domains({counted("a", 4), counted("b", 4)}, 9);
  CHECK(same[0].examples.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(same[0].examples[i].qid == counted("a", 4).examples[i].qid);

  CHECK_THROWS_AS(data::upsample_domains({counted("a", 2), counted("b", 0)}, 1), Error);
  CHECK_THROWS_AS(data::upsample_domains({}, 1), Error);
}

TEST_CASE("batches are single-domain and cover each window once") {
  const std::vector<data::DomainDataset> sets{windowed("a", 64), windowed("b", 64)};
  const auto batches = data::single_domain_batches(sets, 32, 4);
  REQUIRE(batches.size() == 4);
  std::map<std::string, int> per_domain;
  std::multiset<std::string> seen;
  for (const auto& b : batches) {
    ++per_domain[b.domain];
    for (const auto* w : b.windows) {
      CHECK(w->domain == b.domain);
      seen.insert(w->window_id);
    }
  }
  CHECK(per_domain["a"] == 2);
  CHECK(per_domain["b"] == 2);
  CHECK(seen.size() == 128);
  CHECK(std::set<std::string>(seen.begin(), seen.end()).size() == 128);

  const auto again = data::single_domain_batches(sets, 32, 4);
  for (std::size_t i = 0; i < batches.size(); ++i) {
    REQUIRE(again[i].windows.size() == batches[i].windows.size());
    for (std::size_t j = 0; j < batches[i].windows.size(); ++j) {
      CHECK(again[i].windows[j]->window_id == batches[i].windows[j]->window_id);
    }
  }
  const auto ragged = data::single_domain_batches(std::vector<data::DomainDataset>{windowed("c", 5)}, 2, 1);
  CHECK(ragged.size() == 3);
  CHECK_THROWS_AS(data::single_domain_batches(sets, 0, 1), Error);
}

TEST_CASE("leave-one-out plan equals every (n-1)-subset") {
  const std::vector<std::string> two{"A", "B"};
  const auto p2 = data::leave_one_out_splits(two);
  REQUIRE(p2.combos.size() == 2);
  CHECK(p2.combos[0].sources == std::vector<std::string>{"B"});
  CHECK(p2.combos[1].sources == std::vector<std::string>{"A"});

  for (std::size_t n = 3; n <= 6; ++n) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < n; ++i) names.push_back("s" + std::to_string(i));
    // Oracle: enumerate all subsets by bitmask and keep those of size n−1.
    std::set<std::set<std::string>> expected;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
      if (static_cast<std::size_t>(__builtin_popcount(mask)) != n - 1) continue;
      std::set<std::string> s;
      for (std::size_t i = 0; i < n; ++i) {
        if (mask & (1u << i)) s.insert(names[i]);
      }
      expected.insert(s);
    }
    const auto plan = data::leave_one_out_splits(names);
    std::set<std::set<std::string>> got;
    for (const auto& c : plan.combos) {
      std::set<std::string> s(c.sources.begin(), c.sources.end());
      CHECK(s.size() == n - 1);
      CHECK(s.count(c.held_out) == 0);
      s.insert(c.held_out);
      CHECK(s.size() == n);
      got.insert(std::set<std::string>(c.sources.begin(), c.sources.end()));
    }
    CHECK(plan.combos.size() == n);
    CHECK(got == expected);
  }
  const std::vector<std::string> dup{"A", "A", "B"};
  CHECK_THROWS_AS(data::leave_one_out_splits(dup), Error);
  const std::vector<std::string> one{"A"};
  CHECK_THROWS_AS(data::leave_one_out_splits(one), Error);
}
