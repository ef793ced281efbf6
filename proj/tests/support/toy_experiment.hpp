// Copyright 2026 The dgkd Authors
// SPDX-License-Identifier: Apache-2.0

// End-to-end toy study: ERM vs gold-only KD vs augmented KD, evaluated on
// held-out target domains.

#pragma once

#include <chrono>
#include <map>
#include <string>
#include <vector>

#include "dgkd/data/tokenizer.hpp"
#include "dgkd/data/windowing.hpp"
#include "dgkd/eval/scoring.hpp"
#include "dgkd/synth/generator.hpp"
#include "dgkd/toy/toy_data.hpp"
#include "dgkd/train/teacher_cache.hpp"
#include "dgkd/train/trainers.hpp"

namespace dgkd::testing {

struct ToyStudyOptions {
  toy::ToyOptions data;
  std::size_t seeds = 10;
  std::size_t max_len = 64;
  model::EncoderConfig student;  // vocab_size/max_len filled in
  model::EncoderConfig teacher;
  train::TrainConfig student_cfg;
  train::TrainConfig teacher_cfg;
  std::size_t synthetic_per_domain = 800;
  std::vector<train::Method> methods{train::Method::erm, train::Method::kd_gold, train::Method::kd_aug};
  bool verbose = false;
};

struct ToyStudyResult {
  /// method → per-example OOD F1, concatenated over seeds then targets.
  std::map<std::string, std::vector<double>> ood_scores;
  /// method → per-seed mean OOD F1.
  std::map<std::string, std::vector<double>> seed_means;
  double teacher_ood_f1 = 0.0;
  double seconds = 0.0;
};

inline ToyStudyResult run_toy_study(const ToyStudyOptions& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto corpus = toy::make_toy_corpus(o.data);
  std::vector<std::string> texts;
  for (const auto* d : corpus.sources()) {
    for (const auto& ex : d->train.examples) {
      texts.push_back(ex.question);
      texts.push_back(ex.passage);
    }
  }
  const auto tok = data::WordTokenizer::build(texts);
  data::WindowOptions train_w{o.max_len, 0, false};
  data::WindowOptions eval_w{o.max_len, 0, true};

  std::vector<data::DomainDataset> train, dev, test;
  for (const auto* d : corpus.sources()) {
    train.push_back(data::make_windows(d->train, tok, train_w));
    dev.push_back(data::make_windows(d->dev, tok, eval_w));
  }
  for (const auto* d : corpus.targets()) test.push_back(data::make_windows(d->test, tok, eval_w));

  auto log = [&](const std::string& msg) {
    if (o.verbose) {
      const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      std::fprintf(stderr, "[%7.1fs] %s\n", s, msg.c_str());
    }
  };

  train::TrainInputs base;
  base.train = train;
  base.dev = dev;
  base.tokenizer_id = tok.id();
  base.combo_id = "toy";

  ToyStudyResult result;
  train::TeacherLogitCache cache;
  std::vector<data::DomainDataset> synthetic;
  const bool need_teacher = std::any_of(o.methods.begin(), o.methods.end(), train::uses_teacher);
  if (need_teacher) {
    auto tin = base;
    tin.model_config = o.teacher;
    tin.model_config.vocab_size = tok.vocab_size();
    tin.model_config.max_len = o.max_len;
    auto tcfg = o.teacher_cfg;
    tcfg.method = train::Method::erm;
    const auto teacher = train::train_model(tcfg, tin).checkpoint;
    double t_ood = 0.0;
    for (const auto& ds : test) t_ood += eval::mean_f1(eval::score_dataset(teacher.model, ds, 30)) / double(test.size());
    result.teacher_ood_f1 = t_ood;
    log("teacher dev macro " + std::to_string(teacher.meta.extra["dev"].back()["macro_f1"].get<double>()) +
        " ood " + std::to_string(t_ood));

    std::vector<data::Window> all;
    for (const auto& ds : train) all.insert(all.end(), ds.windows.begin(), ds.windows.end());
    for (std::size_t i = 0; i < corpus.sources().size(); ++i) {
      const auto* d = corpus.sources()[i];
      const auto gen = synth::fit_generator(d->train);
      synth::GeneratorConfig gc;
      gc.total_questions = o.synthetic_per_domain;
      gc.seed = derive_seed(o.data.seed, 0x5a + i);
      gc.source_domain = d->name;
      const auto passages = synth::unique_passages(d->train);
      auto set = synth::generate_questions(*gen, passages, gc);
      synthetic.push_back(data::make_windows(set.dataset, tok, eval_w));
      all.insert(all.end(), synthetic.back().windows.begin(), synthetic.back().windows.end());
    }
    cache = train::cache_teacher_logits(teacher, all, tok.id());
    log("cached " + std::to_string(cache.size()) + " windows");
  }

  for (std::size_t seed = 1; seed <= o.seeds; ++seed) {
    for (auto method : o.methods) {
      auto in = base;
      in.model_config = o.student;
      in.model_config.vocab_size = tok.vocab_size();
      in.model_config.max_len = o.max_len;
      in.teacher = &cache;
      if (method == train::Method::kd_aug) in.synthetic = synthetic;
      auto cfg = o.student_cfg;
      const auto defaults = train::TrainConfig::method_defaults(method);
      cfg.method = method;
      cfg.tau = defaults.tau;
      cfg.seed = seed;
      const auto res = train::train_model(cfg, in);
      std::vector<double> scores;
      for (const auto& ds : test) {
        for (const auto& r : eval::score_dataset(res.checkpoint.model, ds, 30)) scores.push_back(r.f1);
      }
      double mean = 0.0;
      for (double s : scores) mean += s / double(scores.size());
      const std::string name(train::to_string(method));
      result.seed_means[name].push_back(mean);
      auto& all = result.ood_scores[name];
      all.insert(all.end(), scores.begin(), scores.end());
      log("seed " + std::to_string(seed) + " " + name + " ood " + std::to_string(mean) + " dev " +
          std::to_string(res.epochs.at(res.selected_epoch - 1).dev_macro_f1));
    }
  }
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

}  // namespace dgkd::testing
