// Copyright 2026 The dgkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "dgkd/eval/metrics.hpp"
#include "dgkd/eval/scoring.hpp"

namespace dgkd::eval {

/// 100·(value − base)/base.
double relative_gain_percent(double base, double value);
/// One decimal and a percent sign, e.g. "1.9%".
std::string format_gain(double base, double value);
/// "53.4±0.8" with scores given in [0, 1] and shown ×100.
std::string format_mean_sd(const MeanSd& cell);

/// Per-example scores of one trained model.
struct ModelScores {
  std::string method;
  std::string combo;
  std::uint64_t seed = 0;
  std::vector<ScoreRecord> test;  // held-out target sets
  std::vector<ScoreRecord> dev;   // in-domain dev sets
};

/// JSON lines of {qid, dataset, f1}.
void write_score_dump(const std::filesystem::path& path, std::span<const ScoreRecord> records);
std::vector<ScoreRecord> read_score_dump(const std::filesystem::path& path);
/// JSON object qid → predicted text.
void write_predictions(const std::filesystem::path& path, std::span<const ScoreRecord> records);

/// Dataset → mean F1 for one model.
std::map<std::string, double> per_dataset_means(std::span<const ScoreRecord> records);

/// qid → F1 averaged over every model of `method`.
std::map<std::string, double> per_example_scores(std::span<const ModelScores> models, const std::string& method);

struct ReportOptions {
  std::vector<std::string> methods;  // row order
  std::string baseline = "erm";
};

/// Markdown with the OOD table (mean±SD per target set and average),
/// the in-domain vs OOD relative-gain table, the KD+DIL table, and paired
/// t-tests against the baseline.
std::string render_report(std::span<const ModelScores> models, const ReportOptions& options);

/// CSV rows `covered,covering,coverage_percent,improved_examples` for every
/// ordered pair of distinct methods.
std::string render_coverage_csv(std::span<const ModelScores> models, const std::vector<std::string>& methods,
                                const std::string& baseline = "erm");

}  // namespace dgkd::eval
