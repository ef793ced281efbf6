// Copyright 2026 The dgkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace dgkd::data {

/// A token with its [begin, end) character offsets in the source text.
struct Token {
  std::string text;
  std::size_t begin = 0;
  std::size_t end = 0;
};

/// Reserved ids shared by every tokenizer implementation.
inline constexpr int kPadId = 0;
inline constexpr int kUnkId = 1;
inline constexpr int kClsId = 2;
inline constexpr int kSepId = 3;

/// Injected tokenizer interface. Windowing and models only see ids and
/// character offsets, so a subword implementation can replace the default.
class Tokenizer {
 public:
  virtual ~Tokenizer() = default;

  /// Stable identifier; caches and checkpoints record it.
  virtual std::string id() const = 0;
  virtual std::size_t vocab_size() const = 0;
  virtual std::vector<Token> split(std::string_view text) const = 0;
  virtual int lookup(std::string_view token) const = 0;
  virtual std::string_view token_text(int id) const = 0;

  std::vector<int> encode(std::span<const Token> tokens) const;
};

/// Lowercased whitespace + punctuation splitter over a fixed vocabulary.
class WordTokenizer final : public Tokenizer {
 public:
  /// Builds the vocabulary from a corpus: specials first, then tokens with
  /// count >= min_count ordered by (count desc, text asc), capped at max_size.
  static WordTokenizer build(std::span<const std::string> corpus, std::size_t min_count = 1,
                             std::size_t max_size = 0);
  static WordTokenizer load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  explicit WordTokenizer(std::vector<std::string> vocab);

  std::string id() const override { return id_; }
  std::size_t vocab_size() const override { return vocab_.size(); }
  std::vector<Token> split(std::string_view text) const override;
  int lookup(std::string_view token) const override;
  std::string_view token_text(int id) const override;

  const std::vector<std::string>& vocabulary() const { return vocab_; }

  /// The splitting rule alone, without a vocabulary.
  static std::vector<Token> split_words(std::string_view text);

 private:
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, int> index_;
  std::string id_;
};

}  // namespace dgkd::data
