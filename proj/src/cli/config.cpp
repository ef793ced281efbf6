// Copyright 2026 The dgkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "dgkd/cli/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include "dgkd/core/error.hpp"
#include "dgkd/model/checkpoint.hpp"

namespace dgkd::cli {
namespace {

using nlohmann::json;

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

model::EncoderConfig encoder_from(const json& j) {
  json copy = j;
  if (!copy.contains("vocab_size")) copy["vocab_size"] = 0;
  return model::encoder_config_from_json(copy);
}

template <class T>
std::vector<T> list_or(const json& j, const char* key, std::vector<T> fallback) {
  return j.contains(key) ? j.at(key).get<std::vector<T>>() : fallback;
}

json encoder_to_json(const model::EncoderConfig& c) {
  auto j = model::to_json(c);
  j.erase("vocab_size");
  return j;
}

}  // namespace

ExperimentConfig experiment_config_from_json(const json& j, const std::filesystem::path& base_dir) {
  ExperimentConfig cfg;
  cfg.output_dir = resolve(base_dir, j.value("output_dir", std::string("runs")));
  cfg.seeds = list_or<std::uint64_t>(j, "seeds", cfg.seeds);
  for (const auto& s : j.at("sources")) {
    cfg.sources.push_back({s.at("name").get<std::string>(), resolve(base_dir, s.at("train").get<std::string>()),
                           resolve(base_dir, s.at("dev").get<std::string>())});
  }
  for (const auto& t : j.value("targets", json::array())) {
    cfg.targets.push_back({t.at("name").get<std::string>(), resolve(base_dir, t.at("test").get<std::string>())});
  }
  const auto w = j.value("window", json::object());
  cfg.max_len = w.value("max_len", cfg.max_len);
  cfg.stride = w.value("stride", cfg.stride);
  const auto tk = j.value("tokenizer", json::object());
  cfg.min_count = tk.value("min_count", cfg.min_count);
  cfg.max_vocab = tk.value("max_size", cfg.max_vocab);
  cfg.student = j.contains("student") ? encoder_from(j.at("student")) : model::EncoderConfig::student(0);
  cfg.teacher = j.contains("teacher") ? encoder_from(j.at("teacher")) : model::EncoderConfig::teacher(0);
  cfg.train_settings = j.value("train", json::object());
  cfg.teacher_train = train::train_config_from_json(j.value("teacher_train", cfg.train_settings));
  cfg.teacher_train.method = train::Method::erm;
  cfg.companion_train = train::train_config_from_json(j.value("companion_train", cfg.train_settings));
  cfg.companion_train.method = train::Method::erm;
  const auto overrides = j.value("method_overrides", json::object());
  for (const auto& [name, fields] : overrides.items()) {
    train::parse_method(name);
    cfg.method_overrides[name] = fields;
  }
  const auto g = j.value("grid", json::object());
  cfg.grid.learning_rate = list_or<double>(g, "learning_rate", cfg.grid.learning_rate);
  cfg.grid.epochs = list_or<std::size_t>(g, "epochs", cfg.grid.epochs);
  cfg.grid.tau = list_or<double>(g, "tau", cfg.grid.tau);
  cfg.grid.lambda_adv = list_or<double>(g, "lambda_adv", cfg.grid.lambda_adv);
  cfg.grid.lambda_erm = list_or<double>(g, "lambda_erm", cfg.grid.lambda_erm);
  cfg.grid.beta = list_or<double>(g, "beta", cfg.grid.beta);
  cfg.generator = synth::generator_config_from_json(j.value("generator", json::object()));
  if (j.contains("methods")) {
    for (const auto& m : j.at("methods")) cfg.methods.push_back(train::parse_method(m.get<std::string>()));
  } else {
    cfg.methods = {train::Method::erm,     train::Method::kd_gold, train::Method::kd_aug,
                   train::Method::domain_adv, train::Method::episodic, train::Method::mldg};
  }
  cfg.jobs = j.value("jobs", cfg.jobs);
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingArtifact("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  ExperimentConfig cfg;
  try {
    cfg = experiment_config_from_json(j, path.parent_path());
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  cfg.config_path = path;
  if (const char* dir = std::getenv("DGKD_OUTPUT_DIR"); dir != nullptr && *dir != '\0') cfg.output_dir = dir;
  if (const char* jobs = std::getenv("DGKD_JOBS"); jobs != nullptr && *jobs != '\0') {
    try {
      cfg.jobs = std::stoul(jobs);
    } catch (const std::exception&) {
      throw Error(std::string("DGKD_JOBS is not a count: ") + jobs);
    }
  }
  return cfg;
}

json to_json(const ExperimentConfig& cfg) {
  json sources = json::array(), targets = json::array(), methods = json::array();
  for (const auto& s : cfg.sources) sources.push_back({{"name", s.name}, {"train", s.train}, {"dev", s.dev}});
  for (const auto& t : cfg.targets) targets.push_back({{"name", t.name}, {"test", t.test}});
  for (auto m : cfg.methods) methods.push_back(train::to_string(m));
  json overrides = json::object();
  for (const auto& [k, v] : cfg.method_overrides) overrides[k] = v;
  return {{"output_dir", cfg.output_dir},
          {"seeds", cfg.seeds},
          {"sources", sources},
          {"targets", targets},
          {"window", {{"max_len", cfg.max_len}, {"stride", cfg.stride}}},
          {"tokenizer", {{"min_count", cfg.min_count}, {"max_size", cfg.max_vocab}}},
          {"student", encoder_to_json(cfg.student)},
          {"teacher", encoder_to_json(cfg.teacher)},
          {"train", cfg.train_settings},
          {"teacher_train", train::to_json(cfg.teacher_train)},
          {"companion_train", train::to_json(cfg.companion_train)},
          {"method_overrides", overrides},
          {"grid",
           {{"learning_rate", cfg.grid.learning_rate},
            {"epochs", cfg.grid.epochs},
            {"tau", cfg.grid.tau},
            {"lambda_adv", cfg.grid.lambda_adv},
            {"lambda_erm", cfg.grid.lambda_erm},
            {"beta", cfg.grid.beta}}},
          {"generator", synth::to_json(cfg.generator)},
          {"methods", methods},
          {"jobs", cfg.jobs}};
}

void ExperimentConfig::validate() const {
  if (sources.size() < 2) throw Error("config needs at least two sources for leave-one-out");
  if (seeds.empty()) throw Error("config seed list is empty");
  std::set<std::string> names;
  for (const auto& s : sources) {
    if (!names.insert(s.name).second) throw Error("duplicate dataset name " + s.name);
    for (const auto& p : {s.train, s.dev}) {
      if (!std::filesystem::exists(p)) throw MissingArtifact("source " + s.name + ": no such file " + p.string());
    }
  }
  for (const auto& t : targets) {
    if (!names.insert(t.name).second) throw Error("duplicate dataset name " + t.name);
    if (!std::filesystem::exists(t.test)) throw MissingArtifact("target " + t.name + ": no such file " + t.test.string());
  }
  if (grid.learning_rate.empty() || grid.epochs.empty() || grid.tau.empty() || grid.lambda_adv.empty() ||
      grid.lambda_erm.empty() || grid.beta.empty()) {
    throw Error("every sweep grid axis needs at least one value");
  }
  if (jobs == 0) throw Error("jobs must be at least 1");
  if (methods.empty()) throw Error("config method list is empty");
  auto s = student, t = teacher;
  s.vocab_size = t.vocab_size = 8;
  s.validate();
  t.validate();
  generator.validate();
  for (auto m : train::all_methods()) method_config(m).validate();
  teacher_train.validate();
  companion_train.validate();
}

train::TrainConfig ExperimentConfig::method_config(train::Method method) const {
  json j = train::to_json(train::TrainConfig::method_defaults(method));
  j.merge_patch(train_settings);
  const auto it = method_overrides.find(std::string(train::to_string(method)));
  if (it != method_overrides.end()) j.merge_patch(it->second);
  j["method"] = train::to_string(method);
  return train::train_config_from_json(j);
}

}  // namespace dgkd::cli
