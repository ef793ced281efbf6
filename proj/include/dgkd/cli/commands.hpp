// Copyright 2026 The dgkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dgkd/cli/config.hpp"
#include "dgkd/data/tokenizer.hpp"
#include "dgkd/data/types.hpp"
#include "dgkd/eval/report.hpp"

namespace dgkd::cli {

/// Artifact locations under the output directory.
struct Layout {
  std::filesystem::path root;

  std::filesystem::path tokenizer() const { return root / "prepared" / "tokenizer.vocab"; }
  std::filesystem::path plan() const { return root / "prepared" / "plan.json"; }
  std::filesystem::path combo_manifest(const std::string& combo) const {
    return root / "prepared" / "combos" / (combo + ".json");
  }
  std::filesystem::path windows(const std::string& dataset, data::Split split) const;
  std::filesystem::path synthetic(const std::string& source) const { return root / "synthetic" / (source + ".jsonl"); }
  std::filesystem::path synthetic_windows(const std::string& source) const {
    return root / "synthetic" / (source + ".windows.jsonl");
  }
  std::filesystem::path teacher(const std::string& combo) const { return root / "teachers" / combo / "teacher.ckpt"; }
  std::filesystem::path teacher_logits(const std::string& combo) const {
    return root / "teachers" / combo / "logits.bin";
  }
  std::filesystem::path companions() const { return root / "companions"; }
  std::filesystem::path run_dir(const std::string& method, const std::string& combo, std::uint64_t seed) const;
  std::filesystem::path sweep_dir(const std::string& method, const std::string& combo, std::size_t grid_index) const;
  std::filesystem::path sweep_manifest() const { return root / "sweep" / "manifest.json"; }
  std::filesystem::path reports() const { return root / "reports"; }
};

/// Selection flags shared by the subcommands; unset means "all".
struct Selection {
  std::optional<std::string> method;
  std::optional<std::string> combo;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> grid_index;
  std::size_t jobs = 0;  // 0: take the config value
  bool allow_partial = false;
  /// Binary used for child processes; empty means the running executable.
  std::filesystem::path executable;
};

struct PrepareSummary {
  std::size_t written = 0;
  std::size_t unchanged = 0;
};

/// Loads, tokenizes, and windows every dataset, and writes the leave-one-out
/// plan. Files whose bytes would not change are left untouched.
PrepareSummary cmd_prepare(const ExperimentConfig& cfg);
void cmd_train_teacher(const ExperimentConfig& cfg, const Selection& sel);
void cmd_generate(const ExperimentConfig& cfg);
void cmd_cache_logits(const ExperimentConfig& cfg, const Selection& sel);
void cmd_train_companions(const ExperimentConfig& cfg);
/// Trains the selected (method, combo, seed) runs; more than one run fans
/// out to child processes. With `grid_index` set, trains one sweep point.
void cmd_train(const ExperimentConfig& cfg, const Selection& sel);

/// One point of a method's hyperparameter grid.
struct GridPoint {
  std::size_t index = 0;
  train::TrainConfig config;
};
/// Grid points ordered by ascending learning rate, so the first of tied
/// scores has the lowest one.
std::vector<GridPoint> sweep_grid(const ExperimentConfig& cfg, train::Method method);

struct SweepRow {
  std::string method;
  std::string combo;
  std::size_t grid_index = 0;
  double dev_macro_f1 = 0.0;
  std::size_t selected_epoch = 0;
  train::TrainConfig config;
};
/// Index of the best row by dev macro F1; ties go to the lowest learning
/// rate, then the lowest grid index.
std::size_t select_sweep_row(const std::vector<SweepRow>& rows);
void cmd_sweep(const ExperimentConfig& cfg, const Selection& sel);

/// Scores trained runs on every target test set and on in-combo dev sets.
void cmd_evaluate(const ExperimentConfig& cfg, const Selection& sel);
/// Reads the score dumps of every evaluated run.
std::vector<eval::ModelScores> collect_scores(const ExperimentConfig& cfg, bool allow_partial);
void cmd_coverage(const ExperimentConfig& cfg, const Selection& sel);
void cmd_report(const ExperimentConfig& cfg, const Selection& sel);

/// Writes a toy corpus and a matching experiment config into `dir`.
void cmd_make_toy_data(const std::filesystem::path& dir, std::uint64_t seed, std::size_t train_per_domain);

/// Runs argv lists as child processes, at most `jobs` at a time. Throws
/// listing the commands that failed.
void run_children(const std::vector<std::vector<std::string>>& commands, std::size_t jobs);

}  // namespace dgkd::cli
