// Copyright 2026 The dgkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>

#include "dgkd/data/types.hpp"
#include "dgkd/model/checkpoint.hpp"

namespace dgkd::train {

/// Eval-mode teacher logits keyed by window id. Values are held at float32
/// precision so an in-memory cache and its on-disk copy are identical.
struct TeacherLogitCache {
  std::string teacher_id;
  std::string tokenizer_id;
  std::map<std::string, model::SpanLogits> entries;

  std::size_t size() const { return entries.size(); }
  bool contains(const std::string& window_id) const { return entries.count(window_id) != 0; }
  /// Throws naming the window id when absent.
  const model::SpanLogits& at(const std::string& window_id) const;
  /// Merges `other` in; both must come from the same teacher and tokenizer.
  void merge(const TeacherLogitCache& other);
};

inline constexpr std::uint32_t kTeacherCacheVersion = 1;

/// Stable identifier of a checkpoint's weights and config.
std::string teacher_fingerprint(const model::Checkpoint& teacher);

/// Runs the teacher over every window. Throws when the teacher was trained
/// with a different tokenizer than `tokenizer_id`.
TeacherLogitCache cache_teacher_logits(const model::Checkpoint& teacher, std::span<const data::Window> windows,
                                       const std::string& tokenizer_id);

/// Throws unless every window has an entry of matching length.
void check_cache_covers(const TeacherLogitCache& cache, std::span<const data::Window> windows);

void save_teacher_cache(const std::filesystem::path& path, const TeacherLogitCache& cache);
TeacherLogitCache load_teacher_cache(const std::filesystem::path& path);

}  // namespace dgkd::train
