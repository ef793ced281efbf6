// Copyright 2026 The dgkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "dgkd/eval/metrics.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cctype>
#include <cmath>
#include <numeric>
#include <set>
#include <unordered_map>

#include "dgkd/core/error.hpp"

namespace dgkd::eval {
namespace {

bool is_punct(unsigned char c) { return std::ispunct(c) != 0; }

bool is_article(std::string_view w) { return w == "a" || w == "an" || w == "the"; }

}  // namespace

std::vector<std::string> normalize_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  auto flush = [&] {
    if (current.empty()) return;
    std::size_t b = 0, e = current.size();
    while (b < e && is_punct(static_cast<unsigned char>(current[b]))) ++b;
    while (e > b && is_punct(static_cast<unsigned char>(current[e - 1]))) --e;
    std::string token = b == e ? current : current.substr(b, e - b);
    if (!is_article(token)) out.push_back(std::move(token));
    current.clear();
  };
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isspace(u)) {
      flush();
    } else {
      current.push_back(static_cast<char>(std::tolower(u)));
    }
  }
  flush();
  return out;
}

double token_f1(std::string_view prediction, std::string_view gold) {
  const auto p = normalize_tokens(prediction);
  const auto g = normalize_tokens(gold);
  if (p.empty() && g.empty()) return 1.0;
  if (p.empty() || g.empty()) return 0.0;
  std::unordered_map<std::string, int> counts;
  for (const auto& t : g) ++counts[t];
  std::size_t common = 0;
  for (const auto& t : p) {
    auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++common;
    }
  }
  if (common == 0) return 0.0;
  const double precision = static_cast<double>(common) / static_cast<double>(p.size());
  const double recall = static_cast<double>(common) / static_cast<double>(g.size());
  return 2.0 * precision * recall / (precision + recall);
}

double example_f1(std::string_view prediction, std::span<const std::string> golds) {
  if (golds.empty()) throw Error("example_f1 needs at least one gold answer");
  double best = 0.0;
  for (const auto& g : golds) best = std::max(best, token_f1(prediction, g));
  return best;
}

double macro_f1(const std::map<std::string, double>& per_dataset) {
  if (per_dataset.empty()) throw Error("macro_f1 over no datasets");
  double s = 0.0;
  for (const auto& [name, v] : per_dataset) s += v;
  return s / static_cast<double>(per_dataset.size());
}

std::size_t select_checkpoint(const std::map<std::size_t, double>& dev_results) {
  if (dev_results.empty()) throw Error("select_checkpoint over no epochs");
  auto best = dev_results.begin();
  for (auto it = dev_results.begin(); it != dev_results.end(); ++it) {
    if (it->second > best->second) best = it;
  }
  return best->first;
}

MeanSd mean_sd(std::span<const double> values) {
  if (values.empty()) throw Error("mean of no values");
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

MethodRunResult aggregate_runs(std::string method, std::span<const std::map<std::string, double>> models) {
  if (models.empty()) throw Error("aggregate_runs over no models");
  MethodRunResult out;
  out.method = std::move(method);
  out.models = models.size();
  for (const auto& m : models) {
    if (m.size() != models.front().size() ||
        !std::equal(m.begin(), m.end(), models.front().begin(),
                    [](const auto& a, const auto& b) { return a.first == b.first; })) {
      throw Error("aggregate_runs: models were evaluated on different datasets");
    }
  }
  std::map<std::string, double> means;
  for (const auto& [dataset, unused] : models.front()) {
    std::vector<double> values;
    for (const auto& m : models) values.push_back(m.at(dataset));
    out.per_dataset[dataset] = mean_sd(values);
    means[dataset] = out.per_dataset[dataset].mean;
  }
  out.macro = macro_f1(means);
  return out;
}

CoverageReport coverage(const std::map<std::string, double>& erm, const std::map<std::string, double>& m,
                        const std::map<std::string, double>& m_prime, std::string covered_name,
                        std::string covering_name) {
  auto same_keys = [](const auto& a, const auto& b) {
    return a.size() == b.size() &&
           std::equal(a.begin(), a.end(), b.begin(), [](const auto& x, const auto& y) { return x.first == y.first; });
  };
  if (!same_keys(erm, m) || !same_keys(erm, m_prime)) throw Error("coverage: score maps cover different qids");
  CoverageReport report;
  report.covered = std::move(covered_name);
  report.covering = std::move(covering_name);
  double m_sum = 0.0, mp_sum = 0.0;
  for (const auto& [qid, base] : erm) {
    const double mv = m.at(qid);
    if (mv > base) {
      report.improved_qids.push_back(qid);
      m_sum += mv;
      mp_sum += m_prime.at(qid);
    }
  }
  if (!report.improved_qids.empty()) report.percent = 100.0 * mp_sum / m_sum;
  return report;
}

double t_two_tailed_p(double t, double dof) {
  boost::math::students_t dist(dof);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

TTestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error("paired_t_test: samples differ in length");
  if (a.size() < 2) throw Error("paired_t_test needs at least two pairs");
  std::vector<double> diff(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
  const auto [mean, sd] = mean_sd(diff);
  TTestResult r;
  r.n = diff.size();
  if (sd == 0.0) {
    if (std::all_of(diff.begin(), diff.end(), [](double d) { return d == 0.0; })) return r;
    throw Error("paired_t_test: differences have zero variance (degenerate input)");
  }
  r.t = mean / (sd / std::sqrt(static_cast<double>(r.n)));
  r.p = t_two_tailed_p(r.t, static_cast<double>(r.n - 1));
  return r;
}

}  // namespace dgkd::eval
