// Copyright 2026 The dgkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <nlohmann/json.hpp>
#include <span>
#include <string>
#include <vector>

#include "dgkd/core/rng.hpp"
#include "dgkd/data/types.hpp"

namespace dgkd::synth {

struct GeneratorConfig {
  double top_p = 0.95;
  std::size_t top_k = 10;
  std::size_t questions_per_passage = 1;
  std::size_t total_questions = 2000;
  std::uint64_t seed = 0;
  std::string source_domain;
  std::size_t max_question_tokens = 30;

  void validate() const;
  /// Hash of every field; recorded as provenance.
  std::string hash() const;
};

nlohmann::json to_json(const GeneratorConfig& cfg);
GeneratorConfig generator_config_from_json(const nlohmann::json& j);

/// Passage-conditioned question sampler for one source domain.
class QuestionGenerator {
 public:
  virtual ~QuestionGenerator() = default;
  virtual std::string id() const = 0;
  virtual const std::string& domain() const = 0;
  /// Samples one question for `passage`, token by token, with top-k/top-p.
  virtual std::string generate(const std::string& passage, const GeneratorConfig& cfg, Rng& rng) const = 0;
};

/// Bigram model over question templates in which question words copied from
/// the passage become a slot; slots are filled with sampled passage spans
/// whose lengths follow the fitted copy-length (or answer-length) counts.
class TemplateQuestionGenerator final : public QuestionGenerator {
 public:
  static constexpr const char* kSlot = "<span>";
  static constexpr const char* kBegin = "<s>";
  static constexpr const char* kEnd = "</s>";

  static TemplateQuestionGenerator fit(const data::DomainDataset& train_set);

  std::string id() const override { return id_; }
  const std::string& domain() const override { return domain_; }
  std::string generate(const std::string& passage, const GeneratorConfig& cfg, Rng& rng) const override;

  /// Next-token distribution after `prev` as (token, probability) pairs.
  std::vector<std::pair<std::string, double>> next_distribution(const std::string& prev) const;
  nlohmann::json to_json() const;

 private:
  std::string domain_;
  std::string id_;
  std::vector<std::string> vocab_;
  std::map<std::string, std::map<std::string, double>> bigrams_;
  std::map<std::size_t, double> slot_lengths_;
};

std::unique_ptr<QuestionGenerator> fit_generator(const data::DomainDataset& train_set);

struct SyntheticQuestionSet {
  data::DomainDataset dataset;  // examples carry no answers
  std::string generator_id;
  std::string config_hash;
  nlohmann::json config;
};

/// Exactly cfg.total_questions questions, cycling over passages with
/// questions_per_passage consecutive questions each. Deterministic in cfg.seed.
SyntheticQuestionSet generate_questions(const QuestionGenerator& generator, std::span<const std::string> passages,
                                        const GeneratorConfig& cfg);

/// Distinct passages of a dataset in first-appearance order.
std::vector<std::string> unique_passages(const data::DomainDataset& ds);

/// MRQA JSON lines plus `<path>.provenance.json`.
void save_synthetic_set(const std::filesystem::path& path, const SyntheticQuestionSet& set);
SyntheticQuestionSet load_synthetic_set(const std::filesystem::path& path);

}  // namespace dgkd::synth
