// Copyright 2026 The dgkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <string>

#include "dgkd/data/tokenizer.hpp"
#include "dgkd/data/types.hpp"

namespace dgkd::data {

struct WindowOptions {
  std::size_t max_len = 128;
  /// Passage-token step between consecutive window starts; 0 means max_len/2.
  std::size_t stride = 0;
  /// false: emit only windows that contain a full gold answer (training).
  bool keep_unanswered = false;

  std::size_t effective_stride() const { return stride == 0 ? max_len / 2 : stride; }
};

/// Slides fixed-size windows over every passage of `ds`.
///
/// Each window is [CLS] question [SEP] chunk [SEP]. A window is labeled with
/// the first answer span lying fully inside its chunk. Throws naming the qid
/// when the question leaves no room for passage tokens.
DomainDataset make_windows(DomainDataset ds, const Tokenizer& tokenizer, const WindowOptions& options);

/// Appends [PAD] tokens up to `length`; labels and spans are unchanged.
Window pad_window(Window window, std::size_t length);

/// Per-position 1/0 mask of non-padding tokens.
std::vector<std::uint8_t> token_mask(const Window& window);

/// Passage text covered by the inclusive token span [start, end].
std::string span_text(const RCExample& example, const Window& window, std::size_t start, std::size_t end);

struct WindowCacheMeta {
  std::string tokenizer_id;
  std::size_t max_len = 0;
  std::size_t stride = 0;
  bool keep_unanswered = false;
};

inline constexpr int kWindowCacheVersion = 1;

/// Self-describing JSON container: metadata header, examples and windows.
void save_window_cache(const std::filesystem::path& path, const DomainDataset& ds, const WindowCacheMeta& meta);
DomainDataset load_window_cache(const std::filesystem::path& path, WindowCacheMeta* meta = nullptr);
WindowCacheMeta read_window_cache_meta(const std::filesystem::path& path);

}  // namespace dgkd::data
