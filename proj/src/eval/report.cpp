// Copyright 2026 The dgkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "dgkd/eval/report.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>

#include "dgkd/core/error.hpp"

namespace dgkd::eval {
namespace {

using nlohmann::json;

std::vector<const ModelScores*> models_of(std::span<const ModelScores> models, const std::string& method) {
  std::vector<const ModelScores*> out;
  for (const auto& m : models) {
    if (m.method == method) out.push_back(&m);
  }
  return out;
}

std::vector<std::map<std::string, double>> dataset_rows(const std::vector<const ModelScores*>& models, bool dev) {
  std::vector<std::map<std::string, double>> rows;
  for (const auto* m : models) rows.push_back(per_dataset_means(dev ? m->dev : m->test));
  return rows;
}

// Scores as displayed: ×100, one decimal.
double shown(double score) { return std::round(1000.0 * score) / 10.0; }

bool is_kd_dil(const std::string& method) {
  return method == "kd_domain_adv" || method == "kd_episodic" || method == "kd_mldg";
}

}  // namespace

double relative_gain_percent(double base, double value) {
  if (base == 0.0) throw Error("relative gain over a zero baseline");
  return 100.0 * (value - base) / base;
}

std::string format_gain(double base, double value) { return fmt::format("{:.1f}%", relative_gain_percent(base, value)); }

std::string format_mean_sd(const MeanSd& cell) { return fmt::format("{:.1f}±{:.1f}", 100.0 * cell.mean, 100.0 * cell.sd); }

void write_score_dump(const std::filesystem::path& path, std::span<const ScoreRecord> records) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& r : records) out << json{{"qid", r.qid}, {"dataset", r.dataset}, {"f1", r.f1}}.dump() << '\n';
}

std::vector<ScoreRecord> read_score_dump(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingArtifact("cannot open score dump " + path.string());
  std::vector<ScoreRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = json::parse(line);
      out.push_back({j.at("qid").get<std::string>(), j.at("dataset").get<std::string>(), "", j.at("f1").get<double>()});
    } catch (const json::exception& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void write_predictions(const std::filesystem::path& path, std::span<const ScoreRecord> records) {
  json j = json::object();
  for (const auto& r : records) j[r.qid] = r.prediction;
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(1) << '\n';
}

std::map<std::string, double> per_dataset_means(std::span<const ScoreRecord> records) {
  std::map<std::string, std::pair<double, std::size_t>> acc;
  for (const auto& r : records) {
    acc[r.dataset].first += r.f1;
    ++acc[r.dataset].second;
  }
  std::map<std::string, double> out;
  for (const auto& [d, s] : acc) out[d] = s.first / static_cast<double>(s.second);
  return out;
}

std::map<std::string, double> per_example_scores(std::span<const ModelScores> models, const std::string& method) {
  const auto ms = models_of(models, method);
  if (ms.empty()) throw Error("no models for method " + method);
  std::map<std::string, double> sum;
  std::map<std::string, std::size_t> count;
  for (const auto* m : ms) {
    for (const auto& r : m->test) {
      sum[r.qid] += r.f1;
      ++count[r.qid];
    }
  }
  for (auto& [qid, s] : sum) {
    if (count[qid] != ms.size()) throw Error("example " + qid + " is not scored by every " + method + " model");
    s /= static_cast<double>(count[qid]);
  }
  return sum;
}

std::string render_report(std::span<const ModelScores> models, const ReportOptions& options) {
  std::string md;
  std::set<std::string> datasets;
  for (const auto& m : models) {
    for (const auto& r : m.test) datasets.insert(r.dataset);
  }
  std::map<std::string, MethodRunResult> ood;
  std::map<std::string, double> in_domain;  // mean over models of each model's own dev macro F1
  for (const auto& method : options.methods) {
    const auto ms = models_of(models, method);
    if (ms.empty()) continue;
    ood[method] = aggregate_runs(method, dataset_rows(ms, false));
    std::vector<double> dev_macros;
    for (const auto& row : dataset_rows(ms, true)) {
      if (!row.empty()) dev_macros.push_back(macro_f1(row));
    }
    if (dev_macros.size() == ms.size()) in_domain[method] = mean_sd(dev_macros).mean;
  }

  md += "# Results\n\n";
  md += "Scores are token F1 ×100, mean±SD over trained models (leave-one-out combinations × seeds).\n";
  md += "Significance: paired two-tailed t-test on per-example F1 pooled over all target test sets, each example's\n";
  md += "score averaged over the method's models.\n\n";

  auto ood_table = [&](const std::vector<std::string>& rows, const std::string& title) {
    md += "## " + title + "\n\n| Method |";
    for (const auto& d : datasets) md += " " + d + " |";
    md += " Avg |\n|---|";
    for (std::size_t i = 0; i < datasets.size(); ++i) md += "---|";
    md += "---|\n";
    for (const auto& method : rows) {
      const auto it = ood.find(method);
      if (it == ood.end()) continue;
      md += "| " + method + " |";
      for (const auto& d : datasets) {
        const auto c = it->second.per_dataset.find(d);
        md += " " + (c == it->second.per_dataset.end() ? std::string("n/a") : format_mean_sd(c->second)) + " |";
      }
      md += fmt::format(" {:.1f} |\n", 100.0 * it->second.macro);
    }
    md += "\n";
  };

  std::vector<std::string> main_rows, combo_rows;
  for (const auto& m : options.methods) (is_kd_dil(m) ? combo_rows : main_rows).push_back(m);
  ood_table(main_rows, "Out-of-domain test F1");

  md += "## In-domain dev vs out-of-domain test (relative gain over " + options.baseline + ")\n\n";
  md += "| Method | In-domain dev | OOD test |\n|---|---|---|\n";
  const auto base_ood = ood.find(options.baseline);
  const auto base_in = in_domain.find(options.baseline);
  for (const auto& method : options.methods) {
    const auto o = ood.find(method);
    if (o == ood.end()) continue;
    const auto i = in_domain.find(method);
    std::string in_cell = "n/a", ood_cell = fmt::format("{:.1f}", 100.0 * o->second.macro);
    if (i != in_domain.end()) in_cell = fmt::format("{:.1f}", 100.0 * i->second);
    if (method != options.baseline) {
      if (i != in_domain.end() && base_in != in_domain.end()) {
        in_cell += " (" + format_gain(shown(base_in->second), shown(i->second)) + ")";
      }
      if (base_ood != ood.end()) {
        ood_cell += " (" + format_gain(shown(base_ood->second.macro), shown(o->second.macro)) + ")";
      }
    }
    md += "| " + method + " | " + in_cell + " | " + ood_cell + " |\n";
  }
  md += "\n";

  if (!combo_rows.empty()) {
    std::vector<std::string> rows;
    for (const auto& m : options.methods) {
      if (m == "kd_gold" || m == "domain_adv" || m == "episodic" || m == "mldg" || is_kd_dil(m)) rows.push_back(m);
    }
    ood_table(rows, "KD combined with domain-invariant learning");
  }

  if (base_ood != ood.end()) {
    md += "## Paired t-tests against " + options.baseline + "\n\n| Method | Mean diff | t | p | n |\n|---|---|---|---|---|\n";
    const auto base_scores = per_example_scores(models, options.baseline);
    for (const auto& method : options.methods) {
      if (method == options.baseline || ood.find(method) == ood.end()) continue;
      const auto scores = per_example_scores(models, method);
      std::vector<double> a, b;
      for (const auto& [qid, s] : scores) {
        const auto it = base_scores.find(qid);
        if (it == base_scores.end()) continue;
        a.push_back(s);
        b.push_back(it->second);
      }
      double diff = 0.0;
      for (std::size_t k = 0; k < a.size(); ++k) diff += (a[k] - b[k]) / static_cast<double>(a.size());
      std::string t_cell = "n/a", p_cell = "n/a";
      try {
        const auto t = paired_t_test(a, b);
        t_cell = fmt::format("{:.3f}", t.t);
        p_cell = fmt::format("{:.3g}", t.p);
      } catch (const Error&) {
      }
      md += fmt::format("| {} | {:.2f} | {} | {} | {} |\n", method, 100.0 * diff, t_cell, p_cell, a.size());
    }
    md += "\n";
  }
  return md;
}

std::string render_coverage_csv(std::span<const ModelScores> models, const std::vector<std::string>& methods,
                                const std::string& baseline) {
  const auto erm = per_example_scores(models, baseline);
  std::map<std::string, std::map<std::string, double>> scores;
  for (const auto& m : methods) scores[m] = per_example_scores(models, m);
  std::string csv = "covered,covering,coverage_percent,improved_examples\n";
  for (const auto& covered : methods) {
    for (const auto& covering : methods) {
      if (covered == covering) continue;
      const auto rep = coverage(erm, scores[covered], scores[covering], covered, covering);
      csv += covered + "," + covering + "," +
             (rep.defined() ? fmt::format("{:.2f}", *rep.percent) : std::string("undefined")) + "," +
             std::to_string(rep.improved_qids.size()) + "\n";
    }
  }
  return csv;
}

}  // namespace dgkd::eval
