// Copyright 2026 The dgkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "dgkd/data/tokenizer.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>

#include "dgkd/core/error.hpp"
#include "dgkd/core/hash.hpp"

namespace dgkd::data {
namespace {

const std::vector<std::string> kSpecials = {"[PAD]", "[UNK]", "[CLS]", "[SEP]"};

bool is_word_byte(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

}  // namespace

std::vector<int> Tokenizer::encode(std::span<const Token> tokens) const {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(lookup(t.text));
  return ids;
}

std::vector<Token> WordTokenizer::split_words(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (std::isspace(c)) {
      ++i;
      continue;
    }
    if (is_word_byte(c)) {
      const std::size_t begin = i;
      std::string word;
      while (i < text.size() && is_word_byte(static_cast<unsigned char>(text[i]))) {
        word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(text[i]))));
        ++i;
      }
      out.push_back({std::move(word), begin, i});
      continue;
    }
    out.push_back({std::string(1, text[i]), i, i + 1});
    ++i;
  }
  return out;
}

WordTokenizer WordTokenizer::build(std::span<const std::string> corpus, std::size_t min_count,
                                   std::size_t max_size) {
  std::map<std::string, std::size_t> counts;
  for (const auto& text : corpus) {
    for (auto& t : split_words(text)) ++counts[t.text];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked;
  for (auto& [word, n] : counts) {
    if (n >= min_count && std::find(kSpecials.begin(), kSpecials.end(), word) == kSpecials.end()) {
      ranked.emplace_back(word, n);
    }
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> vocab = kSpecials;
  for (auto& [word, n] : ranked) {
    if (max_size != 0 && vocab.size() >= max_size) break;
    vocab.push_back(word);
  }
  return WordTokenizer(std::move(vocab));
}

WordTokenizer::WordTokenizer(std::vector<std::string> vocab) : vocab_(std::move(vocab)) {
  if (vocab_.size() < kSpecials.size() ||
      !std::equal(kSpecials.begin(), kSpecials.end(), vocab_.begin())) {
    throw FormatError("vocabulary must start with [PAD] [UNK] [CLS] [SEP]");
  }
  Fnv1a h;
  for (std::size_t i = 0; i < vocab_.size(); ++i) {
    if (!index_.emplace(vocab_[i], static_cast<int>(i)).second) {
      throw FormatError("duplicate vocabulary entry '" + vocab_[i] + "'");
    }
    h.update(vocab_[i]);
    h.update("\n");
  }
  id_ = "word-" + to_hex(h.digest());
}

WordTokenizer WordTokenizer::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingArtifact("cannot open vocabulary " + path.string());
  std::vector<std::string> vocab;
  std::string line;
  while (std::getline(in, line)) vocab.push_back(line);
  return WordTokenizer(std::move(vocab));
}

void WordTokenizer::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write vocabulary " + path.string());
  for (const auto& w : vocab_) out << w << '\n';
}

std::vector<Token> WordTokenizer::split(std::string_view text) const { return split_words(text); }

int WordTokenizer::lookup(std::string_view token) const {
  const auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnkId : it->second;
}

std::string_view WordTokenizer::token_text(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= vocab_.size()) return "[UNK]";
  return vocab_[static_cast<std::size_t>(id)];
}

}  // namespace dgkd::data
