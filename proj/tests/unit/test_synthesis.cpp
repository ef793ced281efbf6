// Copyright 2026 The dgkd Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <set>

#include "dgkd/core/error.hpp"
#include "dgkd/data/mrqa.hpp"
#include "dgkd/synth/generator.hpp"
#include "dgkd/synth/sampler.hpp"

using namespace dgkd;

namespace {

data::RCExample example(const std::string& domain, std::size_t i, const std::string& question,
                        const std::string& passage, const std::string& answer) {
  data::RCExample ex;
  ex.qid = domain + "-" + std::to_string(i);
  ex.domain = domain;
  ex.question = question;
  ex.passage = passage;
  ex.answers = {answer};
  const auto at = passage.find(answer);
  REQUIRE(at != std::string::npos);
  ex.answer_spans.push_back({at, at + answer.size(), answer});
  return ex;
}

const std::vector<std::string> kNames{"ada", "bo", "cyd", "dee", "eli", "fay", "gus", "hal"};
const std::vector<std::string> kCities{"oslo", "rome", "lima", "pune", "kobe", "bonn", "nice", "riga"};

std::string passage_for(std::size_t i) {
  return kNames[i % 8] + " lives in " + kCities[(i * 3) % 8] + " . " + kNames[(i + 1) % 8] + " lives in " +
         kCities[(i * 3 + 1) % 8] + " .";
}

data::DomainDataset styled(const std::string& domain, const std::vector<std::string>& prefixes, std::size_t n) {
  data::DomainDataset ds;
  ds.name = domain;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& prefix = prefixes[i % prefixes.size()];
    ds.examples.push_back(
        example(domain, i, prefix + " " + kNames[i % 8] + " live ?", passage_for(i), kCities[(i * 3) % 8]));
  }
  return ds;
}

std::string first_word(const std::string& q) { return q.substr(0, q.find(' ')); }

}  // namespace

TEST_CASE("top-k/top-p probe renormalizes over the retained support") {
  const std::vector<double> probs{0.5, 0.3, 0.1, 0.1};
  const auto kept = synth::top_k_top_p(probs, 2, 0.95);
  REQUIRE(kept.size() == 2);
  CHECK(kept[0].index == 0);
  CHECK(kept[1].index == 1);
  CHECK(kept[0].prob == doctest::Approx(0.625).epsilon(1e-12));
  CHECK(kept[1].prob == doctest::Approx(0.375).epsilon(1e-12));

  Rng rng(99);
  const int draws = 100000;
  std::vector<int> counts(4, 0);
  for (int i = 0; i < draws; ++i) ++counts[synth::sample_top_k_top_p(probs, 2, 0.95, rng)];
  CHECK(counts[2] == 0);
  CHECK(counts[3] == 0);
  for (int j = 0; j < 2; ++j) {
    const double p = j == 0 ? 0.625 : 0.375;
    const double sigma = std::sqrt(draws * p * (1 - p));
    CHECK(std::abs(counts[j] - draws * p) <= 3 * sigma);
  }
}

TEST_CASE("top-k of one is greedy") {
  Rng rng(1);
  const std::vector<double> probs{0.1, 0.2, 0.4, 0.3};
  for (int i = 0; i < 200; ++i) CHECK(synth::sample_top_k_top_p(probs, 1, 0.95, rng) == 2);
  CHECK(synth::top_k_top_p(probs, 1, 0.5).front().prob == 1.0);
}

TEST_CASE("filter keeps the smallest top-k prefix reaching the nucleus mass") {
  Rng rng(17);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + rng.index(12);
    std::vector<double> probs(n);
    double total = 0.0;
    for (auto& p : probs) total += (p = rng.uniform() + 1e-3);
    for (auto& p : probs) p /= total;
    const std::size_t k = 1 + rng.index(n + 2);
    const double top_p = 0.05 + 0.95 * rng.uniform();

    // Brute force: sort by probability, cut at k, renormalize, cut at mass.
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return probs[a] > probs[b]; });
    order.resize(std::min(k, n));
    double kmass = 0.0;
    for (auto i : order) kmass += probs[i];
    std::size_t keep = 0;
    double cum = 0.0;
    while (keep < order.size()) {
      cum += probs[order[keep]] / kmass;
      ++keep;
      if (cum >= top_p - 1e-12) break;
    }
    const auto got = synth::top_k_top_p(probs, k, top_p);
    REQUIRE(got.size() == keep);
    double mass = 0.0;
    for (std::size_t i = 0; i < keep; ++i) mass += probs[order[i]];
    for (std::size_t i = 0; i < keep; ++i) {
      CHECK(got[i].index == order[i]);
      CHECK(got[i].prob == doctest::Approx(probs[order[i]] / mass).epsilon(1e-12));
    }
  }
}

TEST_CASE("sampler rejects invalid controls") {
  const std::vector<double> probs{0.5, 0.5};
  CHECK_THROWS_AS(synth::top_k_top_p(probs, 0, 0.9), Error);
  CHECK_THROWS_AS(synth::top_k_top_p(probs, 1, 0.0), Error);
  CHECK_THROWS_AS(synth::top_k_top_p(probs, 1, 1.5), Error);
}

TEST_CASE("generators fitted on disjoint question styles emit disjoint prefixes") {
  const auto a = synth::fit_generator(styled("alpha", {"where", "whereabouts"}, 40));
  const auto b = synth::fit_generator(styled("beta", {"name", "tell"}, 40));
  CHECK(a->id() != b->id());
  synth::GeneratorConfig cfg;
  cfg.total_questions = 300;
  std::vector<std::string> passages;
  for (std::size_t i = 0; i < 10; ++i) passages.push_back(passage_for(i + 100));
  std::set<std::string> pa, pb;
  for (const auto& ex : synth::generate_questions(*a, passages, cfg).dataset.examples) pa.insert(first_word(ex.question));
  for (const auto& ex : synth::generate_questions(*b, passages, cfg).dataset.examples) pb.insert(first_word(ex.question));
  CHECK(pa == std::set<std::string>{"where", "whereabouts"});
  CHECK(pb == std::set<std::string>{"name", "tell"});
}

TEST_CASE("a one-example domain still yields its template family") {
  data::DomainDataset ds;
  ds.name = "solo";
  ds.examples.push_back(example("solo", 0, "where does ada live ?", passage_for(0), kCities[0]));
  const auto g = synth::fit_generator(ds);
  synth::GeneratorConfig cfg;
  cfg.total_questions = 20;
  const std::vector<std::string> passages{passage_for(3)};
  for (const auto& ex : synth::generate_questions(*g, passages, cfg).dataset.examples) {
    CHECK(first_word(ex.question) == "where");
  }
  data::DomainDataset empty;
  empty.name = "none";
  CHECK_THROWS_AS(synth::fit_generator(empty), Error);
}

TEST_CASE("generation emits exactly the requested count, round-robin, without answers") {
  const auto g = synth::fit_generator(styled("alpha", {"where"}, 20));
  synth::GeneratorConfig cfg;
  cfg.total_questions = 7;
  cfg.questions_per_passage = 2;
  cfg.seed = 3;
  const std::vector<std::string> passages{passage_for(1), passage_for(2), passage_for(3)};
  const auto set = synth::generate_questions(*g, passages, cfg);
  REQUIRE(set.dataset.examples.size() == 7);
  const std::vector<std::size_t> expected{0, 0, 1, 1, 2, 2, 0};
  for (std::size_t i = 0; i < 7; ++i) {
    const auto& ex = set.dataset.examples[i];
    CHECK(ex.passage == passages[expected[i]]);
    CHECK(ex.answers.empty());
    CHECK(ex.answer_spans.empty());
    CHECK(ex.domain == "alpha");
    CHECK_FALSE(ex.question.empty());
  }
  const auto again = synth::generate_questions(*g, passages, cfg);
  for (std::size_t i = 0; i < 7; ++i) CHECK(again.dataset.examples[i].question == set.dataset.examples[i].question);
  CHECK(set.generator_id == g->id());
  CHECK(set.config_hash == cfg.hash());
  CHECK_THROWS_AS(synth::generate_questions(*g, std::vector<std::string>{}, cfg), Error);
}

TEST_CASE("synthetic sets round-trip with their provenance") {
  const auto g = synth::fit_generator(styled("alpha", {"where"}, 20));
  synth::GeneratorConfig cfg;
  cfg.total_questions = 5;
  const std::vector<std::string> passages{passage_for(4)};
  const auto set = synth::generate_questions(*g, passages, cfg);
  const auto dir = std::filesystem::temp_directory_path() / "dgkd_synth_roundtrip";
  std::filesystem::create_directories(dir);
  const auto path = dir / "alpha.jsonl";
  synth::save_synthetic_set(path, set);
  CHECK(std::filesystem::exists(path.string() + ".provenance.json"));
  const auto back = synth::load_synthetic_set(path);
  CHECK(back.generator_id == set.generator_id);
  CHECK(back.config_hash == set.config_hash);
  REQUIRE(back.dataset.examples.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(back.dataset.examples[i].question == set.dataset.examples[i].question);
    CHECK(back.dataset.examples[i].answers.empty());
  }
  std::filesystem::remove_all(dir);
}
