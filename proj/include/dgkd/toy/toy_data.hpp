// Copyright 2026 The dgkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dgkd/data/types.hpp"

namespace dgkd::toy {

/// Fact-lookup reading comprehension: each passage lists a few
/// (entity, attribute, value) facts and the question asks for one value.
/// Every domain renders facts and questions through its own templates, so
/// held-out domains differ from the sources in surface form only.
struct ToyOptions {
  std::uint64_t seed = 0;
  std::size_t train_per_domain = 400;
  std::size_t dev_per_domain = 100;
  std::size_t test_per_domain = 200;
  std::size_t facts_per_passage = 4;
  /// Draw each passage's attributes without replacement, so the question's
  /// attribute alone identifies the answer.
  bool distinct_attributes = true;
  std::vector<std::string> sources{"news", "wiki", "forum"};
  std::vector<std::string> targets{"legal", "chat"};
};

struct ToyDomain {
  std::string name;
  bool is_target = false;
  data::DomainDataset train;
  data::DomainDataset dev;
  data::DomainDataset test;
};

struct ToyCorpus {
  std::vector<ToyDomain> domains;

  std::vector<const ToyDomain*> sources() const;
  std::vector<const ToyDomain*> targets() const;
};

/// Names with built-in templates: news, wiki, forum, legal, chat, quiz.
const std::vector<std::string>& toy_domain_names();

ToyCorpus make_toy_corpus(const ToyOptions& options);

/// Writes `<dir>/<domain>/<split>.jsonl.gz` for every domain and split.
void write_toy_corpus(const std::filesystem::path& dir, const ToyCorpus& corpus);

}  // namespace dgkd::toy
