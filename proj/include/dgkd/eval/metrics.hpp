// Copyright 2026 The dgkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dgkd::eval {

/// Lowercases, splits on whitespace, strips punctuation from token edges
/// (tokens made only of punctuation are kept as-is) and drops articles.
std::vector<std::string> normalize_tokens(std::string_view text);

/// Bag-of-tokens F1. Both empty → 1; exactly one empty → 0.
double token_f1(std::string_view prediction, std::string_view gold);

/// Max token_f1 over gold answers. Throws on an empty gold list.
double example_f1(std::string_view prediction, std::span<const std::string> golds);

/// Unweighted mean over datasets.
double macro_f1(const std::map<std::string, double>& per_dataset);

/// Best epoch by macro-F1; ties go to the earlier epoch.
std::size_t select_checkpoint(const std::map<std::size_t, double>& dev_results);

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation (n−1); 0 for one model
};

/// Per-dataset mean±SD over models and the macro average of the means.
struct MethodRunResult {
  std::string method;
  std::map<std::string, MeanSd> per_dataset;
  double macro = 0.0;
  std::size_t models = 0;
};

/// `models[i]` maps dataset → mean F1 of model i. All models must cover the
/// same datasets.
MethodRunResult aggregate_runs(std::string method, std::span<const std::map<std::string, double>> models);

MeanSd mean_sd(std::span<const double> values);

struct CoverageReport {
  std::string covered;   // M
  std::string covering;  // M′
  std::vector<std::string> improved_qids;  // E: qids where M beats ERM
  /// 100·mean(M′ over E)/mean(M over E); empty when E is empty.
  std::optional<double> percent;
  bool defined() const { return percent.has_value(); }
};

/// Coverage of M by M′ relative to ERM. All three maps share one qid set.
CoverageReport coverage(const std::map<std::string, double>& erm, const std::map<std::string, double>& m,
                        const std::map<std::string, double>& m_prime, std::string covered_name = "M",
                        std::string covering_name = "M'");

struct TTestResult {
  double t = 0.0;
  double p = 1.0;
  std::size_t n = 0;
};

/// Paired two-tailed Student's t-test on a − b.
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b);

/// Two-tailed p-value of a t statistic with `dof` degrees of freedom.
double t_two_tailed_p(double t, double dof);

}  // namespace dgkd::eval
