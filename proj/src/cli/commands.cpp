// Copyright 2026 The dgkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "dgkd/cli/commands.hpp"

#include <fmt/format.h>
#include <spawn.h>
#include <sys/wait.h>

#include <algorithm>
#include <fstream>
#include <iterator>
#include <map>
#include <set>

#include "dgkd/core/error.hpp"
#include "dgkd/core/hash.hpp"
#include "dgkd/core/log.hpp"
#include "dgkd/core/rng.hpp"
#include "dgkd/data/mrqa.hpp"
#include "dgkd/data/windowing.hpp"
#include "dgkd/model/checkpoint.hpp"
#include "dgkd/synth/generator.hpp"
#include "dgkd/toy/toy_data.hpp"
#include "dgkd/train/episodic.hpp"
#include "dgkd/train/teacher_cache.hpp"
#include "dgkd/train/trainers.hpp"

extern char** environ;

namespace dgkd::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingArtifact("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

json read_json(const fs::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

// Writes through a temporary file and keeps the old file when the bytes match.
template <class Writer>
bool write_if_changed(const fs::path& path, Writer&& writer) {
  fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  writer(tmp);
  if (fs::exists(path) && read_file(path) == read_file(tmp)) {
    fs::remove(tmp);
    return false;
  }
  fs::rename(tmp, path);
  return true;
}

void require(const fs::path& path, const std::string& what, const std::string& command) {
  if (!fs::exists(path)) {
    throw MissingArtifact("missing " + what + " (" + path.string() + "); run `dgkd " + command + "` first");
  }
}

data::WordTokenizer load_tokenizer(const Layout& layout) {
  require(layout.tokenizer(), "tokenizer", "prepare");
  return data::WordTokenizer::load(layout.tokenizer());
}

data::LeaveOneOutPlan load_plan(const Layout& layout) {
  require(layout.plan(), "leave-one-out plan", "prepare");
  const auto j = read_json(layout.plan());
  data::LeaveOneOutPlan plan;
  plan.source_names = j.at("sources").get<std::vector<std::string>>();
  for (const auto& c : j.at("combos")) {
    plan.combos.push_back({c.at("id").get<std::string>(), c.at("held_out").get<std::string>(),
                           c.at("sources").get<std::vector<std::string>>()});
  }
  return plan;
}

json combo_to_json(const data::Combo& c) { return {{"id", c.id}, {"held_out", c.held_out}, {"sources", c.sources}}; }

std::vector<data::Combo> select_combos(const data::LeaveOneOutPlan& plan, const std::optional<std::string>& id) {
  if (!id) return plan.combos;
  for (const auto& c : plan.combos) {
    if (c.id == *id) return {c};
  }
  std::string known;
  for (const auto& c : plan.combos) known += (known.empty() ? "" : ", ") + c.id;
  throw Error("unknown combo '" + *id + "'; known combos: " + known);
}

std::vector<train::Method> select_methods(const ExperimentConfig& cfg, const std::optional<std::string>& method) {
  if (method) return {train::parse_method(*method)};
  return cfg.methods;
}

std::vector<std::uint64_t> select_seeds(const ExperimentConfig& cfg, const std::optional<std::uint64_t>& seed) {
  if (seed) return {*seed};
  return cfg.seeds;
}

data::DomainDataset load_windows(const Layout& layout, const std::string& name, data::Split split) {
  const auto path = layout.windows(name, split);
  require(path, std::string(data::to_string(split)) + " windows of " + name, "prepare");
  return data::load_window_cache(path);
}

model::EncoderConfig sized(model::EncoderConfig c, const data::Tokenizer& tok, std::size_t max_len) {
  c.vocab_size = tok.vocab_size();
  c.max_len = max_len;
  return c;
}

train::TrainInputs combo_inputs(const Layout& layout, const data::Combo& combo, const std::string& tokenizer_id) {
  train::TrainInputs in;
  for (const auto& s : combo.sources) {
    in.train.push_back(load_windows(layout, s, data::Split::train));
    in.dev.push_back(load_windows(layout, s, data::Split::dev));
  }
  in.combo_id = combo.id;
  in.tokenizer_id = tokenizer_id;
  return in;
}

std::vector<std::string> base_argv(const ExperimentConfig& cfg, const Selection& sel, const std::string& command) {
  if (cfg.config_path.empty()) throw Error("child processes need a config loaded from a file");
  const fs::path exe = sel.executable.empty() ? fs::read_symlink("/proc/self/exe") : sel.executable;
  std::vector<std::string> argv{exe.string(), command, "--config", fs::absolute(cfg.config_path).string()};
  if (log::threshold() > log::Level::info) argv.push_back("--quiet");
  return argv;
}

std::size_t jobs_of(const ExperimentConfig& cfg, const Selection& sel) { return sel.jobs == 0 ? cfg.jobs : sel.jobs; }

json summary_of(const train::TrainResult& res, const train::TrainConfig& tc, const std::string& combo,
                const std::string& ckpt_hash) {
  json epochs = json::array();
  for (const auto& e : res.epochs) {
    epochs.push_back(
        {{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"dev_f1", e.dev_f1}, {"dev_macro_f1", e.dev_macro_f1}});
  }
  return {{"method", train::to_string(tc.method)},
          {"combo", combo},
          {"seed", tc.seed},
          {"config", train::to_json(tc)},
          {"selected_epoch", res.selected_epoch},
          {"dev_macro_f1", res.epochs.at(res.selected_epoch - 1).dev_macro_f1},
          {"epochs", epochs},
          {"checkpoint_hash", ckpt_hash}};
}

std::optional<train::TrainConfig> manifest_choice(const Layout& layout, train::Method method,
                                                  const std::string& combo) {
  if (!fs::exists(layout.sweep_manifest())) return std::nullopt;
  for (const auto& row : read_json(layout.sweep_manifest()).at("rows")) {
    if (row.at("method") == train::to_string(method) && row.at("combo") == combo) {
      return train::train_config_from_json(row.at("config"));
    }
  }
  return std::nullopt;
}

void train_one(const ExperimentConfig& cfg, const Layout& layout, train::Method method, const data::Combo& combo,
               std::uint64_t seed, std::optional<std::size_t> grid_index) {
  const auto tok = load_tokenizer(layout);
  train::TrainConfig tc;
  fs::path out;
  if (grid_index) {
    const auto grid = sweep_grid(cfg, method);
    if (*grid_index >= grid.size()) {
      throw Error(fmt::format("grid index {} out of range for {} ({} points)", *grid_index,
                              train::to_string(method), grid.size()));
    }
    tc = grid[*grid_index].config;
    seed = cfg.seeds.front();
    out = layout.sweep_dir(std::string(train::to_string(method)), combo.id, *grid_index);
  } else {
    tc = manifest_choice(layout, method, combo.id).value_or(cfg.method_config(method));
    out = layout.run_dir(std::string(train::to_string(method)), combo.id, seed);
  }
  tc.method = method;
  tc.seed = seed;
  tc.validate();

  auto in = combo_inputs(layout, combo, tok.id());
  in.model_config = sized(cfg.student, tok, cfg.max_len);

  train::TeacherLogitCache cache;
  if (method == train::Method::kd_aug) {
    for (const auto& s : combo.sources) {
      const auto path = layout.synthetic_windows(s);
      require(path, "synthetic questions for " + s, "generate");
      in.synthetic.push_back(data::load_window_cache(path));
    }
  }
  if (train::uses_teacher(method)) {
    require(layout.teacher_logits(combo.id), "teacher logit cache for " + combo.id,
            "cache-logits --combo " + combo.id);
    cache = train::load_teacher_cache(layout.teacher_logits(combo.id));
    try {
      for (const auto& ds : in.train) train::check_cache_covers(cache, ds.windows);
      for (const auto& ds : in.synthetic) train::check_cache_covers(cache, ds.windows);
    } catch (const Error& e) {
      throw MissingArtifact(std::string(e.what()) + "; run `dgkd generate` and then `dgkd cache-logits --combo " +
                            combo.id + "`");
    }
    in.teacher = &cache;
  }
  train::CompanionBank bank;
  if (train::uses_companions(method)) {
    for (const auto& s : combo.sources) {
      require(layout.companions() / (s + ".ckpt"), "companion model for " + s, "train-companions");
    }
    bank = train::load_companions(layout.companions(), combo.sources);
    in.companions = &bank;
  }

  fs::create_directories(out);
  std::ofstream log_out(out / "train_log.jsonl", std::ios::trunc);
  train::TrainHooks hooks;
  hooks.on_step = [&](const train::StepRecord& r) { log_out << train::to_json(r).dump() << '\n'; };
  log::info("training {} on {} seed {}", train::to_string(method), combo.id, seed);
  const auto res = train::train_model(tc, in, hooks);
  const auto ckpt = out / "model.ckpt";
  model::save_checkpoint(ckpt, res.checkpoint);
  write_text(out / "summary.json", summary_of(res, tc, combo.id, hash_file(ckpt)).dump(2) + "\n");
  log::info("selected epoch {} (dev macro F1 {:.4f})", res.selected_epoch,
            res.epochs.at(res.selected_epoch - 1).dev_macro_f1);
}

std::vector<data::DomainDataset> load_targets(const ExperimentConfig& cfg, const Layout& layout) {
  if (cfg.targets.empty()) throw Error("config lists no target datasets");
  std::vector<data::DomainDataset> out;
  for (const auto& t : cfg.targets) out.push_back(load_windows(layout, t.name, data::Split::test));
  return out;
}

void evaluate_one(const fs::path& dir, const data::Combo& combo, const Layout& layout,
                  const std::vector<data::DomainDataset>& targets) {
  const auto ckpt = model::load_checkpoint(dir / "model.ckpt");
  std::size_t max_answer_len = train::TrainConfig{}.max_answer_len;
  if (ckpt.meta.extra.contains("train_config")) {
    max_answer_len = train::train_config_from_json(ckpt.meta.extra.at("train_config")).max_answer_len;
  }
  std::vector<eval::ScoreRecord> test, dev;
  for (const auto& ds : targets) {
    auto r = eval::score_dataset(ckpt.model, ds, max_answer_len);
    test.insert(test.end(), r.begin(), r.end());
  }
  for (const auto& s : combo.sources) {
    auto r = eval::score_dataset(ckpt.model, load_windows(layout, s, data::Split::dev), max_answer_len);
    dev.insert(dev.end(), r.begin(), r.end());
  }
  std::set<std::string> qids;
  for (const auto& r : test) {
    if (!qids.insert(r.qid).second) throw Error("qid " + r.qid + " appears in more than one target set");
  }
  eval::write_predictions(dir / "predictions.json", test);
  eval::write_score_dump(dir / "test_scores.jsonl", test);
  eval::write_score_dump(dir / "dev_scores.jsonl", dev);
}

std::string join(const std::vector<std::string>& items, const std::string& sep) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : sep) + s;
  return out;
}

}  // namespace

fs::path Layout::windows(const std::string& dataset, data::Split split) const {
  return root / "prepared" / "windows" / (dataset + "." + std::string(data::to_string(split)) + ".jsonl");
}

fs::path Layout::run_dir(const std::string& method, const std::string& combo, std::uint64_t seed) const {
  return root / "models" / method / combo / ("seed-" + std::to_string(seed));
}

fs::path Layout::sweep_dir(const std::string& method, const std::string& combo, std::size_t grid_index) const {
  return root / "sweep" / method / combo / ("g" + std::to_string(grid_index));
}

PrepareSummary cmd_prepare(const ExperimentConfig& cfg) {
  cfg.validate();
  const Layout layout{cfg.output_dir};
  PrepareSummary summary;
  auto count = [&](bool written) { ++(written ? summary.written : summary.unchanged); };

  std::vector<data::DomainDataset> train, dev, test;
  for (const auto& s : cfg.sources) {
    data::LoadOptions opts;
    opts.name = s.name;
    data::LoadReport report;
    train.push_back(data::load_mrqa_jsonl(s.train, data::Split::train, opts, &report));
    dev.push_back(data::load_mrqa_jsonl(s.dev, data::Split::dev, opts, &report));
    for (const auto& w : report.warnings) log::warn("{}", w);
  }
  for (const auto& t : cfg.targets) {
    data::LoadOptions opts;
    opts.name = t.name;
    test.push_back(data::load_mrqa_jsonl(t.test, data::Split::test, opts));
  }

  std::vector<std::string> corpus;
  for (const auto& ds : train) {
    for (const auto& ex : ds.examples) {
      corpus.push_back(ex.question);
      corpus.push_back(ex.passage);
    }
  }
  const auto tok = data::WordTokenizer::build(corpus, cfg.min_count, cfg.max_vocab);
  count(write_if_changed(layout.tokenizer(), [&](const fs::path& p) { tok.save(p); }));

  auto emit = [&](const data::DomainDataset& raw, bool keep_unanswered) {
    const data::WindowOptions opts{cfg.max_len, cfg.stride, keep_unanswered};
    const auto ds = data::make_windows(raw, tok, opts);
    const data::WindowCacheMeta meta{tok.id(), cfg.max_len, opts.effective_stride(), keep_unanswered};
    count(write_if_changed(layout.windows(ds.name, ds.split),
                           [&](const fs::path& p) { data::save_window_cache(p, ds, meta); }));
  };
  for (const auto& ds : train) emit(ds, false);
  for (const auto& ds : dev) emit(ds, true);
  for (const auto& ds : test) emit(ds, true);

  std::vector<std::string> names;
  for (const auto& s : cfg.sources) names.push_back(s.name);
  const auto plan = data::leave_one_out_splits(names);
  json combos = json::array();
  for (const auto& c : plan.combos) {
    combos.push_back(combo_to_json(c));
    count(write_if_changed(layout.combo_manifest(c.id),
                           [&](const fs::path& p) { write_text(p, combo_to_json(c).dump(2) + "\n"); }));
  }
  const json plan_json = {{"sources", plan.source_names}, {"combos", combos}, {"tokenizer_id", tok.id()}};
  count(write_if_changed(layout.plan(), [&](const fs::path& p) { write_text(p, plan_json.dump(2) + "\n"); }));
  log::info("prepare: {} files written, {} unchanged", summary.written, summary.unchanged);
  return summary;
}

void cmd_train_teacher(const ExperimentConfig& cfg, const Selection& sel) {
  const Layout layout{cfg.output_dir};
  const auto tok = load_tokenizer(layout);
  for (const auto& combo : select_combos(load_plan(layout), sel.combo)) {
    auto in = combo_inputs(layout, combo, tok.id());
    in.model_config = sized(cfg.teacher, tok, cfg.max_len);
    auto tc = cfg.teacher_train;
    tc.method = train::Method::erm;
    log::info("training teacher for {}", combo.id);
    const auto res = train::train_model(tc, in);
    auto ckpt = res.checkpoint;
    ckpt.meta.method = "teacher";
    fs::create_directories(layout.teacher(combo.id).parent_path());
    model::save_checkpoint(layout.teacher(combo.id), ckpt);
    write_text(layout.teacher(combo.id).parent_path() / "summary.json",
               summary_of(res, tc, combo.id, hash_file(layout.teacher(combo.id))).dump(2) + "\n");
  }
}

void cmd_generate(const ExperimentConfig& cfg) {
  const Layout layout{cfg.output_dir};
  const auto tok = load_tokenizer(layout);
  for (std::size_t i = 0; i < cfg.sources.size(); ++i) {
    const auto& name = cfg.sources[i].name;
    const auto train_set = load_windows(layout, name, data::Split::train);
    const auto gen = synth::fit_generator(train_set);
    auto gc = cfg.generator;
    gc.seed = derive_seed(cfg.generator.seed, i);
    gc.source_domain = name;
    const auto set = synth::generate_questions(*gen, synth::unique_passages(train_set), gc);
    fs::create_directories(layout.synthetic(name).parent_path());
    synth::save_synthetic_set(layout.synthetic(name), set);
    const data::WindowOptions opts{cfg.max_len, cfg.stride, true};
    const auto windows = data::make_windows(set.dataset, tok, opts);
    data::save_window_cache(layout.synthetic_windows(name), windows,
                            {tok.id(), cfg.max_len, opts.effective_stride(), true});
    log::info("generated {} questions for {} ({})", set.dataset.examples.size(), name, set.generator_id);
  }
}

void cmd_cache_logits(const ExperimentConfig& cfg, const Selection& sel) {
  const Layout layout{cfg.output_dir};
  const auto tok = load_tokenizer(layout);
  for (const auto& combo : select_combos(load_plan(layout), sel.combo)) {
    require(layout.teacher(combo.id), "teacher for " + combo.id, "train-teacher --combo " + combo.id);
    const auto teacher = model::load_checkpoint(layout.teacher(combo.id));
    std::vector<data::Window> windows;
    for (const auto& s : combo.sources) {
      const auto ds = load_windows(layout, s, data::Split::train);
      windows.insert(windows.end(), ds.windows.begin(), ds.windows.end());
      if (fs::exists(layout.synthetic_windows(s))) {
        const auto syn = data::load_window_cache(layout.synthetic_windows(s));
        windows.insert(windows.end(), syn.windows.begin(), syn.windows.end());
      } else {
        log::warn("no synthetic questions for {}; kd_aug will need `dgkd generate` and a fresh cache", s);
      }
    }
    const auto cache = train::cache_teacher_logits(teacher, windows, tok.id());
    train::save_teacher_cache(layout.teacher_logits(combo.id), cache);
    log::info("cached teacher logits for {} windows of {}", cache.size(), combo.id);
  }
}

void cmd_train_companions(const ExperimentConfig& cfg) {
  const Layout layout{cfg.output_dir};
  const auto tok = load_tokenizer(layout);
  train::TrainInputs in;
  for (const auto& s : cfg.sources) {
    in.train.push_back(load_windows(layout, s.name, data::Split::train));
    in.dev.push_back(load_windows(layout, s.name, data::Split::dev));
  }
  in.combo_id = "companions";
  in.tokenizer_id = tok.id();
  in.model_config = sized(cfg.student, tok, cfg.max_len);
  const auto bank = train::train_companions(cfg.companion_train, in);
  train::save_companions(layout.companions(), bank, tok.id());
}

void cmd_train(const ExperimentConfig& cfg, const Selection& sel) {
  const Layout layout{cfg.output_dir};
  const auto plan = load_plan(layout);
  if (sel.grid_index) {
    if (!sel.method || !sel.combo) throw Error("--grid-index needs --method and --combo");
    train_one(cfg, layout, train::parse_method(*sel.method), select_combos(plan, sel.combo).front(),
              cfg.seeds.front(), sel.grid_index);
    return;
  }
  struct Run {
    train::Method method;
    data::Combo combo;
    std::uint64_t seed;
  };
  std::vector<Run> runs;
  for (auto m : select_methods(cfg, sel.method)) {
    for (const auto& c : select_combos(plan, sel.combo)) {
      for (auto s : select_seeds(cfg, sel.seed)) runs.push_back({m, c, s});
    }
  }
  if (runs.size() == 1) {
    train_one(cfg, layout, runs[0].method, runs[0].combo, runs[0].seed, std::nullopt);
    return;
  }
  std::vector<std::vector<std::string>> commands;
  for (const auto& r : runs) {
    auto argv = base_argv(cfg, sel, "train");
    argv.insert(argv.end(), {"--method", std::string(train::to_string(r.method)), "--combo", r.combo.id, "--seed",
                             std::to_string(r.seed)});
    commands.push_back(std::move(argv));
  }
  run_children(commands, jobs_of(cfg, sel));
}

std::vector<GridPoint> sweep_grid(const ExperimentConfig& cfg, train::Method method) {
  using train::Method;
  auto lrs = cfg.grid.learning_rate;
  std::sort(lrs.begin(), lrs.end());
  lrs.erase(std::unique(lrs.begin(), lrs.end()), lrs.end());
  const bool tau = train::uses_teacher(method);
  const bool adv = method == Method::domain_adv || method == Method::kd_domain_adv;
  const bool epi = method == Method::episodic || method == Method::kd_episodic;
  const bool meta = method == Method::mldg || method == Method::kd_mldg;
  const auto base = cfg.method_config(method);
  auto axis = [&](bool on, const std::vector<double>& values, double fallback) {
    return on ? values : std::vector<double>{fallback};
  };
  std::vector<GridPoint> out;
  for (double lr : lrs) {
    for (auto epochs : cfg.grid.epochs) {
      for (double t : axis(tau, cfg.grid.tau, base.tau)) {
        for (double la : axis(adv, cfg.grid.lambda_adv, base.lambda_adv)) {
          for (double le : axis(epi, cfg.grid.lambda_erm, base.lambda_erm)) {
            for (double b : axis(meta, cfg.grid.beta, base.beta)) {
              auto c = base;
              c.learning_rate = lr;
              c.epochs = epochs;
              c.tau = t;
              c.lambda_adv = la;
              c.lambda_erm = le;
              c.beta = b;
              out.push_back({out.size(), c});
            }
          }
        }
      }
    }
  }
  return out;
}

std::size_t select_sweep_row(const std::vector<SweepRow>& rows) {
  if (rows.empty()) throw Error("no sweep results to select from");
  std::size_t best = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& a = rows[i];
    const auto& b = rows[best];
    if (a.dev_macro_f1 > b.dev_macro_f1 ||
        (a.dev_macro_f1 == b.dev_macro_f1 &&
         (a.config.learning_rate < b.config.learning_rate ||
          (a.config.learning_rate == b.config.learning_rate && a.grid_index < b.grid_index)))) {
      best = i;
    }
  }
  return best;
}

void cmd_sweep(const ExperimentConfig& cfg, const Selection& sel) {
  const Layout layout{cfg.output_dir};
  const auto plan = load_plan(layout);
  const auto methods = select_methods(cfg, sel.method);
  const auto combos = select_combos(plan, sel.combo);

  std::vector<std::vector<std::string>> commands;
  for (auto m : methods) {
    const std::string name(train::to_string(m));
    const auto grid = sweep_grid(cfg, m);
    for (const auto& c : combos) {
      for (const auto& g : grid) {
        const auto summary = layout.sweep_dir(name, c.id, g.index) / "summary.json";
        auto expected = g.config;
        expected.seed = cfg.seeds.front();
        if (fs::exists(summary) && read_json(summary).at("config") == train::to_json(expected)) continue;
        auto argv = base_argv(cfg, sel, "train");
        argv.insert(argv.end(), {"--method", name, "--combo", c.id, "--grid-index", std::to_string(g.index)});
        commands.push_back(std::move(argv));
      }
    }
  }
  run_children(commands, jobs_of(cfg, sel));

  std::map<std::pair<std::string, std::string>, json> manifest;
  if (fs::exists(layout.sweep_manifest())) {
    for (const auto& row : read_json(layout.sweep_manifest()).at("rows")) {
      manifest[{row.at("method").get<std::string>(), row.at("combo").get<std::string>()}] = row;
    }
  }
  for (auto m : methods) {
    const std::string name(train::to_string(m));
    const auto grid = sweep_grid(cfg, m);
    for (const auto& c : combos) {
      std::vector<SweepRow> rows;
      for (const auto& g : grid) {
        const auto s = read_json(layout.sweep_dir(name, c.id, g.index) / "summary.json");
        rows.push_back({name, c.id, g.index, s.at("dev_macro_f1").get<double>(),
                        s.at("selected_epoch").get<std::size_t>(), train::train_config_from_json(s.at("config"))});
      }
      const auto& best = rows[select_sweep_row(rows)];
      manifest[{name, c.id}] = {{"method", name},
                                {"combo", c.id},
                                {"grid_index", best.grid_index},
                                {"grid_size", grid.size()},
                                {"learning_rate", best.config.learning_rate},
                                {"epochs", best.config.epochs},
                                {"selected_epoch", best.selected_epoch},
                                {"dev_macro_f1", best.dev_macro_f1},
                                {"config", train::to_json(grid[best.grid_index].config)}};
    }
  }
  json rows = json::array();
  for (const auto& [key, row] : manifest) rows.push_back(row);
  write_text(layout.sweep_manifest(), json{{"rows", rows}}.dump(2) + "\n");
  log::info("sweep manifest: {} rows", rows.size());
}

void cmd_evaluate(const ExperimentConfig& cfg, const Selection& sel) {
  const Layout layout{cfg.output_dir};
  const auto plan = load_plan(layout);
  const auto targets = load_targets(cfg, layout);
  const bool explicit_run = sel.method && sel.combo && sel.seed;
  std::size_t evaluated = 0;
  std::vector<std::string> missing;
  for (auto m : select_methods(cfg, sel.method)) {
    const std::string name(train::to_string(m));
    for (const auto& c : select_combos(plan, sel.combo)) {
      for (auto s : select_seeds(cfg, sel.seed)) {
        const auto dir = layout.run_dir(name, c.id, s);
        if (!fs::exists(dir / "model.ckpt")) {
          missing.push_back(fmt::format("{}/{}/seed-{}", name, c.id, s));
          continue;
        }
        evaluate_one(dir, c, layout, targets);
        ++evaluated;
      }
    }
  }
  if (explicit_run && evaluated == 0) {
    require(layout.run_dir(*sel.method, *sel.combo, *sel.seed) / "model.ckpt", "trained model",
            fmt::format("train --method {} --combo {} --seed {}", *sel.method, *sel.combo, *sel.seed));
  }
  if (evaluated == 0) throw MissingArtifact("no trained models to evaluate; run `dgkd train` first");
  if (!missing.empty()) log::warn("not trained yet: {}", join(missing, ", "));
  log::info("evaluated {} models", evaluated);
}

std::vector<eval::ModelScores> collect_scores(const ExperimentConfig& cfg, bool allow_partial) {
  const Layout layout{cfg.output_dir};
  const auto plan = load_plan(layout);
  std::vector<eval::ModelScores> out;
  std::vector<std::string> missing_runs, missing_families;
  for (auto m : cfg.methods) {
    const std::string name(train::to_string(m));
    std::size_t found = 0;
    for (const auto& c : plan.combos) {
      for (auto s : cfg.seeds) {
        const auto dir = layout.run_dir(name, c.id, s);
        if (!fs::exists(dir / "test_scores.jsonl")) {
          missing_runs.push_back(fmt::format("{}/{}/seed-{}", name, c.id, s));
          continue;
        }
        eval::ModelScores ms{name, c.id, s, eval::read_score_dump(dir / "test_scores.jsonl"), {}};
        if (fs::exists(dir / "dev_scores.jsonl")) ms.dev = eval::read_score_dump(dir / "dev_scores.jsonl");
        out.push_back(std::move(ms));
        ++found;
      }
    }
    if (found == 0) missing_families.push_back(name);
  }
  if (!allow_partial && !missing_runs.empty()) {
    std::string msg = "refusing a partial report";
    if (!missing_families.empty()) msg += "; missing model families: " + join(missing_families, ", ");
    msg += "; unevaluated runs: " + join(missing_runs, ", ") +
           " (run `dgkd train` and `dgkd evaluate`, or pass --allow-partial)";
    throw MissingArtifact(msg);
  }
  if (out.empty()) throw MissingArtifact("no evaluated models; run `dgkd evaluate` first");
  return out;
}

void cmd_coverage(const ExperimentConfig& cfg, const Selection& sel) {
  const auto models = collect_scores(cfg, sel.allow_partial);
  std::vector<std::string> methods;
  for (auto m : cfg.methods) {
    const std::string name(train::to_string(m));
    if (std::any_of(models.begin(), models.end(), [&](const auto& x) { return x.method == name; })) {
      methods.push_back(name);
    }
  }
  if (std::find(methods.begin(), methods.end(), "erm") == methods.end()) {
    throw MissingArtifact("coverage needs evaluated erm models; run `dgkd train --method erm` and `dgkd evaluate`");
  }
  const Layout layout{cfg.output_dir};
  write_text(layout.reports() / "coverage.csv", eval::render_coverage_csv(models, methods));
}

void cmd_report(const ExperimentConfig& cfg, const Selection& sel) {
  const auto models = collect_scores(cfg, sel.allow_partial);
  eval::ReportOptions opts;
  for (auto m : cfg.methods) opts.methods.emplace_back(train::to_string(m));
  const Layout layout{cfg.output_dir};
  write_text(layout.reports() / "report.md", eval::render_report(models, opts));
}

void cmd_make_toy_data(const fs::path& dir, std::uint64_t seed, std::size_t train_per_domain) {
  toy::ToyOptions opts;
  opts.seed = seed;
  opts.train_per_domain = train_per_domain;
  opts.facts_per_passage = 3;
  const auto corpus = toy::make_toy_corpus(opts);
  toy::write_toy_corpus(dir / "data", corpus);
  json sources = json::array(), targets = json::array();
  for (const auto* d : corpus.sources()) {
    sources.push_back({{"name", d->name},
                       {"train", "data/" + d->name + "/train.jsonl.gz"},
                       {"dev", "data/" + d->name + "/dev.jsonl.gz"}});
  }
  for (const auto* d : corpus.targets()) {
    targets.push_back({{"name", d->name}, {"test", "data/" + d->name + "/test.jsonl.gz"}});
  }
  const json config = {
      {"output_dir", "runs"},
      {"seeds", {1, 2}},
      {"sources", sources},
      {"targets", targets},
      {"window", {{"max_len", 64}, {"stride", 0}}},
      {"student", {{"num_layers", 2}, {"hidden_dim", 32}, {"num_heads", 2}, {"ffn_dim", 64}, {"init_std", 0.3}}},
      {"teacher", {{"num_layers", 2}, {"hidden_dim", 32}, {"num_heads", 2}, {"ffn_dim", 64}, {"init_std", 0.3}}},
      {"train", {{"learning_rate", 3e-3}, {"epochs", 6}, {"batch_size", 8}}},
      {"teacher_train", {{"learning_rate", 3e-3}, {"epochs", 14}, {"batch_size", 16}, {"seed", 7}}},
      {"companion_train", {{"learning_rate", 3e-3}, {"epochs", 3}, {"batch_size", 16}, {"seed", 11}}},
      {"grid", {{"learning_rate", {1e-3, 3e-3}}, {"epochs", {6}}, {"tau", {1, 2, 4}}}},
      {"generator", {{"total_questions", 1000}, {"top_k", 10}, {"top_p", 0.95}, {"seed", 5}}},
      {"methods", {"erm", "kd_gold", "kd_aug", "domain_adv", "episodic", "mldg"}},
      {"jobs", 1}};
  write_text(dir / "config.json", config.dump(2) + "\n");
}

void run_children(const std::vector<std::vector<std::string>>& commands, std::size_t jobs) {
  if (jobs == 0) throw Error("jobs must be at least 1");
  std::map<pid_t, std::size_t> running;
  std::vector<std::string> failures;
  std::size_t next = 0;
  auto describe = [&](std::size_t i) {
    std::vector<std::string> args(commands[i].begin() + 1, commands[i].end());
    return "dgkd " + join(args, " ");
  };
  while (next < commands.size() || !running.empty()) {
    while (next < commands.size() && running.size() < jobs) {
      std::vector<char*> argv;
      for (const auto& a : commands[next]) argv.push_back(const_cast<char*>(a.c_str()));
      argv.push_back(nullptr);
      pid_t pid = 0;
      if (posix_spawn(&pid, argv[0], nullptr, nullptr, argv.data(), environ) != 0) {
        failures.push_back(describe(next) + " (spawn failed)");
      } else {
        running[pid] = next;
      }
      ++next;
    }
    if (running.empty()) continue;
    int status = 0;
    const pid_t done = waitpid(-1, &status, 0);
    if (done < 0) throw Error("waitpid failed");
    const auto it = running.find(done);
    if (it == running.end()) continue;
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
      failures.push_back(describe(it->second) +
                         (WIFEXITED(status) ? " (exit " + std::to_string(WEXITSTATUS(status)) + ")" : " (signal)"));
    }
    running.erase(it);
  }
  if (!failures.empty()) throw Error("child runs failed: " + join(failures, "; "));
}

}  // namespace dgkd::cli
