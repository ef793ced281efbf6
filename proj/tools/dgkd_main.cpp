// Copyright 2026 The dgkd Authors
// SPDX-License-Identifier: Apache-2.0

#include <CLI11.hpp>
#include <cstdio>
#include <string>

#include "dgkd/cli/commands.hpp"
#include "dgkd/cli/config.hpp"
#include "dgkd/core/error.hpp"
#include "dgkd/core/log.hpp"

namespace {

struct Flags {
  std::string config;
  std::string method;
  std::string combo;
  std::uint64_t seed = 0;
  std::size_t grid_index = 0;
  std::size_t jobs = 0;
  bool allow_partial = false;
  bool quiet = false;
  std::string out_dir;
  std::size_t toy_train = 1000;
};

CLI::App* add(CLI::App& app, Flags& f, const std::string& name, const std::string& help) {
  auto* sub = app.add_subcommand(name, help);
  sub->add_option("--config", f.config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  return sub;
}

bool given(CLI::App* sub, const std::string& name) {
  const auto* opt = sub->get_option_no_throw(name);
  return opt != nullptr && opt->count() > 0;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace dgkd;
  CLI::App app{"Multi-source domain generalization for extractive QA: distillation vs domain-invariant training"};
  app.require_subcommand(1);
  app.fallthrough();
  Flags f;
  app.add_flag("-q,--quiet", f.quiet, "Only print warnings and errors");

  auto* prepare = add(app, f, "prepare", "Load, tokenize, and window datasets; write the leave-one-out plan");
  auto* teacher = add(app, f, "train-teacher", "Train the teacher model for each combo");
  auto* cache = add(app, f, "cache-logits", "Cache teacher logits over training and synthetic windows");
  auto* generate = add(app, f, "generate", "Generate synthetic questions from source passages");
  auto* train = add(app, f, "train", "Train models for (method, combo, seed) runs");
  auto* companions = add(app, f, "train-companions", "Train single-domain companion models for episodic training");
  auto* sweep = add(app, f, "sweep", "Search the hyperparameter grid and write the selection manifest");
  auto* evaluate = add(app, f, "evaluate", "Write predictions and score dumps for trained models");
  auto* coverage = add(app, f, "coverage", "Write coverage CSV over method pairs");
  auto* report = add(app, f, "report", "Write the markdown results report");
  auto* validate = add(app, f, "validate", "Check the config and its referenced files");
  auto* toy = app.add_subcommand("make-toy-data", "Write a toy multi-domain corpus and a matching config");
  toy->add_option("--out", f.out_dir, "Output directory")->required();
  toy->add_option("--seed", f.seed, "Corpus seed");
  toy->add_option("--train-per-domain", f.toy_train, "Training examples per domain");

  for (auto* sub : {teacher, cache, train, sweep, evaluate}) sub->add_option("--combo", f.combo, "Combo id");
  for (auto* sub : {train, sweep, evaluate}) sub->add_option("--method", f.method, "Method name");
  for (auto* sub : {train, evaluate}) sub->add_option("--seed", f.seed, "Run seed");
  for (auto* sub : {train, sweep}) sub->add_option("--jobs", f.jobs, "Parallel child processes");
  for (auto* sub : {coverage, report}) sub->add_flag("--allow-partial", f.allow_partial, "Report what exists");
  train->add_option("--grid-index", f.grid_index, "Train one sweep grid point");

  CLI11_PARSE(app, argc, argv);
  if (f.quiet) log::set_threshold(log::Level::warn);

  try {
    auto* sub = app.get_subcommands().front();
    if (sub == toy) {
      cli::cmd_make_toy_data(f.out_dir, f.seed, f.toy_train);
      return 0;
    }
    const auto cfg = cli::load_experiment_config(f.config);
    cli::Selection sel;
    if (given(sub, "--method")) sel.method = f.method;
    if (given(sub, "--combo")) sel.combo = f.combo;
    if (given(sub, "--seed")) sel.seed = f.seed;
    if (given(sub, "--grid-index")) sel.grid_index = f.grid_index;
    sel.jobs = f.jobs;
    sel.allow_partial = f.allow_partial;

    if (sub == prepare) {
      cli::cmd_prepare(cfg);
    } else if (sub == teacher) {
      cli::cmd_train_teacher(cfg, sel);
    } else if (sub == cache) {
      cli::cmd_cache_logits(cfg, sel);
    } else if (sub == generate) {
      cli::cmd_generate(cfg);
    } else if (sub == train) {
      cli::cmd_train(cfg, sel);
    } else if (sub == companions) {
      cli::cmd_train_companions(cfg);
    } else if (sub == sweep) {
      cli::cmd_sweep(cfg, sel);
    } else if (sub == evaluate) {
      cli::cmd_evaluate(cfg, sel);
    } else if (sub == coverage) {
      cli::cmd_coverage(cfg, sel);
    } else if (sub == report) {
      cli::cmd_report(cfg, sel);
    } else if (sub == validate) {
      cfg.validate();
      std::printf("%s: ok\n", f.config.c_str());
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "dgkd: error: %s\n", e.what());
    return 1;
  }
  return 0;
}
