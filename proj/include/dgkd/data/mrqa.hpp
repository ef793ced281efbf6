// Copyright 2026 The dgkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dgkd/data/types.hpp"

namespace dgkd::data {

struct LoadOptions {
  /// Dataset name; empty means header "dataset" field, else file stem.
  std::string name;
  /// Accept records with an empty `answers` list (synthetic question sets).
  bool allow_unanswered = false;
};

struct LoadReport {
  std::vector<std::string> warnings;
};

/// Reads an MRQA JSON-lines file, plain or gzip-compressed.
///
/// MRQA `char_spans` are inclusive; they are stored half-open. When the
/// `text` of a detected answer does not match the passage slice at its
/// offsets (after whitespace normalization), the offsets win: the span text
/// is replaced by the slice and one warning is recorded.
DomainDataset load_mrqa_jsonl(const std::filesystem::path& path, Split split, const LoadOptions& options = {},
                              LoadReport* report = nullptr);

/// Writes examples back out in the same layout (one context per example).
/// A `.gz` extension selects gzip compression.
void write_mrqa_jsonl(const std::filesystem::path& path, const DomainDataset& dataset);

/// Whole-file read that transparently inflates gzip input.
std::string read_maybe_gzip(const std::filesystem::path& path);

}  // namespace dgkd::data
