// Copyright 2026 The dgkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "dgkd/synth/generator.hpp"

#include <fstream>
#include <set>

#include "dgkd/core/error.hpp"
#include "dgkd/core/hash.hpp"
#include "dgkd/data/mrqa.hpp"
#include "dgkd/data/tokenizer.hpp"
#include "dgkd/synth/sampler.hpp"

namespace dgkd::synth {
namespace {

using nlohmann::json;

std::vector<std::string> words(const std::string& text) {
  std::vector<std::string> out;
  for (auto& t : data::WordTokenizer::split_words(text)) out.push_back(std::move(t.text));
  return out;
}

std::string join(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

std::filesystem::path sidecar(const std::filesystem::path& path) {
  return std::filesystem::path(path.string() + ".provenance.json");
}

}  // namespace

void GeneratorConfig::validate() const {
  if (!(top_p > 0.0 && top_p <= 1.0)) throw Error("top_p must lie in (0, 1]");
  if (top_k < 1) throw Error("top_k must be >= 1");
  if (questions_per_passage < 1) throw Error("questions_per_passage must be >= 1");
  if (max_question_tokens < 1) throw Error("max_question_tokens must be >= 1");
}

std::string GeneratorConfig::hash() const { return hash_string(to_json(*this).dump()); }

json to_json(const GeneratorConfig& c) {
  return {{"top_p", c.top_p},
          {"top_k", c.top_k},
          {"questions_per_passage", c.questions_per_passage},
          {"total_questions", c.total_questions},
          {"seed", c.seed},
          {"source_domain", c.source_domain},
          {"max_question_tokens", c.max_question_tokens}};
}

GeneratorConfig generator_config_from_json(const json& j) {
  GeneratorConfig c;
  c.top_p = j.value("top_p", c.top_p);
  c.top_k = j.value("top_k", c.top_k);
  c.questions_per_passage = j.value("questions_per_passage", c.questions_per_passage);
  c.total_questions = j.value("total_questions", c.total_questions);
  c.seed = j.value("seed", c.seed);
  c.source_domain = j.value("source_domain", c.source_domain);
  c.max_question_tokens = j.value("max_question_tokens", c.max_question_tokens);
  return c;
}

TemplateQuestionGenerator TemplateQuestionGenerator::fit(const data::DomainDataset& train_set) {
  if (train_set.examples.empty()) throw Error("cannot fit a question generator on an empty set");
  TemplateQuestionGenerator g;
  g.domain_ = train_set.name;

  // Words that occur in at least a fifth of the questions belong to the
  // template even when the passage also contains them.
  std::map<std::string, std::size_t> doc_freq;
  std::vector<std::vector<std::string>> questions;
  for (const auto& ex : train_set.examples) {
    questions.push_back(words(ex.question));
    for (const auto& w : std::set<std::string>(questions.back().begin(), questions.back().end())) ++doc_freq[w];
  }
  const double n = static_cast<double>(train_set.examples.size());

  std::map<std::string, std::map<std::string, std::size_t>> counts;
  std::map<std::size_t, std::size_t> slot_counts, answer_counts;
  for (std::size_t e = 0; e < questions.size(); ++e) {
    const auto& ex = train_set.examples[e];
    const auto passage = words(ex.passage);
    const std::set<std::string> in_passage(passage.begin(), passage.end());
    std::vector<std::string> seq{kBegin};
    std::size_t run = 0;
    for (const auto& w : questions[e]) {
      const bool copied = in_passage.count(w) && static_cast<double>(doc_freq[w]) < 0.2 * n;
      if (copied) {
        ++run;
        continue;
      }
      if (run > 0) {
        seq.emplace_back(kSlot);
        ++slot_counts[run];
        run = 0;
      }
      seq.push_back(w);
    }
    if (run > 0) {
      seq.emplace_back(kSlot);
      ++slot_counts[run];
    }
    seq.emplace_back(kEnd);
    for (std::size_t i = 0; i + 1 < seq.size(); ++i) ++counts[seq[i]][seq[i + 1]];
    for (const auto& a : ex.answers) {
      const auto len = words(a).size();
      if (len > 0) ++answer_counts[len];
    }
  }
  for (const auto& [prev, nexts] : counts) {
    double total = 0.0;
    for (const auto& [w, c] : nexts) total += static_cast<double>(c);
    for (const auto& [w, c] : nexts) g.bigrams_[prev][w] = static_cast<double>(c) / total;
  }
  const auto& lengths = slot_counts.empty() ? answer_counts : slot_counts;
  double total = 0.0;
  for (const auto& [len, c] : lengths) total += static_cast<double>(c);
  for (const auto& [len, c] : lengths) g.slot_lengths_[len] = static_cast<double>(c) / total;
  if (g.slot_lengths_.empty()) g.slot_lengths_[1] = 1.0;

  std::set<std::string> vocab;
  for (const auto& [prev, nexts] : g.bigrams_) {
    vocab.insert(prev);
    for (const auto& [w, p] : nexts) vocab.insert(w);
  }
  g.vocab_.assign(vocab.begin(), vocab.end());
  g.id_ = "template-bigram:" + g.domain_ + ":" + hash_string(g.to_json().dump());
  return g;
}

std::vector<std::pair<std::string, double>> TemplateQuestionGenerator::next_distribution(const std::string& prev) const {
  std::vector<std::pair<std::string, double>> out;
  const auto it = bigrams_.find(prev);
  if (it == bigrams_.end()) return {{kEnd, 1.0}};
  for (const auto& [w, p] : it->second) out.emplace_back(w, p);
  return out;
}

std::string TemplateQuestionGenerator::generate(const std::string& passage, const GeneratorConfig& cfg,
                                                Rng& rng) const {
  const auto ptoks = words(passage);
  std::vector<double> len_probs;
  std::vector<std::size_t> len_values;
  for (const auto& [len, p] : slot_lengths_) {
    len_values.push_back(len);
    len_probs.push_back(p);
  }
  std::vector<std::string> out;
  std::string prev = kBegin;
  while (out.size() < cfg.max_question_tokens) {
    const auto dist = next_distribution(prev);
    std::vector<double> probs;
    for (const auto& [w, p] : dist) probs.push_back(p);
    const std::string& next = dist[sample_top_k_top_p(probs, cfg.top_k, cfg.top_p, rng)].first;
    if (next == kEnd) break;
    if (next == kSlot) {
      if (!ptoks.empty()) {
        const std::size_t len =
            std::min(len_values[sample_top_k_top_p(len_probs, cfg.top_k, cfg.top_p, rng)], ptoks.size());
        const std::size_t start = rng.index(ptoks.size() - len + 1);
        for (std::size_t i = start; i < start + len && out.size() < cfg.max_question_tokens; ++i) {
          out.push_back(ptoks[i]);
        }
      }
    } else {
      out.push_back(next);
    }
    prev = next;
  }
  return join(out);
}

json TemplateQuestionGenerator::to_json() const {
  json lengths = json::object();
  for (const auto& [len, p] : slot_lengths_) lengths[std::to_string(len)] = p;
  return {{"domain", domain_}, {"bigrams", bigrams_}, {"slot_lengths", lengths}};
}

std::unique_ptr<QuestionGenerator> fit_generator(const data::DomainDataset& train_set) {
  return std::make_unique<TemplateQuestionGenerator>(TemplateQuestionGenerator::fit(train_set));
}

SyntheticQuestionSet generate_questions(const QuestionGenerator& generator, std::span<const std::string> passages,
                                        const GeneratorConfig& cfg) {
  cfg.validate();
  if (passages.empty()) throw Error("no passages to generate questions for");
  SyntheticQuestionSet set;
  set.generator_id = generator.id();
  set.config_hash = cfg.hash();
  set.config = to_json(cfg);
  set.dataset.name = generator.domain();
  set.dataset.split = data::Split::train;
  Rng rng(cfg.seed);
  for (std::size_t i = 0; i < cfg.total_questions; ++i) {
    const auto& passage = passages[(i / cfg.questions_per_passage) % passages.size()];
    data::RCExample ex;
    ex.qid = generator.domain() + "-syn-" + std::to_string(i);
    ex.question = generator.generate(passage, cfg, rng);
    if (ex.question.empty()) ex.question = "?";
    ex.passage = passage;
    ex.domain = generator.domain();
    set.dataset.examples.push_back(std::move(ex));
  }
  return set;
}

std::vector<std::string> unique_passages(const data::DomainDataset& ds) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& ex : ds.examples) {
    if (seen.insert(ex.passage).second) out.push_back(ex.passage);
  }
  return out;
}

void save_synthetic_set(const std::filesystem::path& path, const SyntheticQuestionSet& set) {
  data::write_mrqa_jsonl(path, set.dataset);
  std::ofstream out(sidecar(path), std::ios::trunc);
  if (!out) throw Error("cannot write " + sidecar(path).string());
  out << json{{"generator_id", set.generator_id},
              {"config_hash", set.config_hash},
              {"config", set.config},
              {"domain", set.dataset.name},
              {"count", set.dataset.examples.size()}}
             .dump(2)
      << '\n';
}

SyntheticQuestionSet load_synthetic_set(const std::filesystem::path& path) {
  std::ifstream in(sidecar(path));
  if (!in) throw MissingArtifact("missing provenance file " + sidecar(path).string());
  json prov;
  try {
    prov = json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(sidecar(path).string() + ": " + e.what());
  }
  SyntheticQuestionSet set;
  set.dataset = data::load_mrqa_jsonl(path, data::Split::train, {prov.at("domain").get<std::string>(), true});
  set.generator_id = prov.at("generator_id").get<std::string>();
  set.config_hash = prov.at("config_hash").get<std::string>();
  set.config = prov.at("config");
  return set;
}

}  // namespace dgkd::synth
