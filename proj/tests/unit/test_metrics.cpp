// Copyright 2026 The dgkd Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "dgkd/core/error.hpp"
#include "dgkd/core/rng.hpp"
#include "dgkd/eval/metrics.hpp"
#include "dgkd/eval/report.hpp"
#include "oracles.hpp"

using namespace dgkd;

using testing::random_text;

TEST_CASE("token_f1 matches the bag-of-tokens oracle on random pairs") {
  Rng rng(2024);
  for (int i = 0; i < 1000; ++i) {
    const auto a = random_text(rng);
    const auto b = random_text(rng);
    CAPTURE(a);
    CAPTURE(b);
    CHECK(eval::token_f1(a, b) == doctest::Approx(testing::oracle_f1(a, b)).epsilon(1e-12));
    CHECK(eval::token_f1(a, b) == doctest::Approx(eval::token_f1(b, a)).epsilon(1e-12));
  }
}

TEST_CASE("token_f1 boundary cases") {
  CHECK(eval::token_f1("Bazex ' syndrome", "Bazex syndrome") == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(eval::token_f1("same words", "same words") == 1.0);
  CHECK(eval::token_f1("alpha", "beta") == 0.0);
  CHECK(eval::token_f1("", "") == 1.0);
  CHECK(eval::token_f1("the", "") == 1.0);
  CHECK(eval::token_f1("word", "") == 0.0);
}

TEST_CASE("example_f1 takes the best gold") {
  using golds = std::vector<std::string>;
  CHECK(eval::example_f1("Janet", golds{"Janet.", "Janet"}) == 1.0);
  CHECK(eval::example_f1("Janet Stewart", golds{"Janet.", "Janet"}) ==
        doctest::Approx(std::max(testing::oracle_f1("Janet Stewart", "Janet."),
                                 testing::oracle_f1("Janet Stewart", "Janet"))));
  CHECK(eval::example_f1("one two", golds{"two three"}) == eval::token_f1("one two", "two three"));
  CHECK(eval::example_f1("zzz", golds{"a b", "c"}) == 0.0);
  CHECK_THROWS_AS(eval::example_f1("x", golds{}), Error);
}

TEST_CASE("macro_f1 is the unweighted mean over datasets") {
  CHECK(eval::macro_f1({{"A", 0.4}, {"B", 0.6}}) == doctest::Approx(0.5));
  CHECK(eval::macro_f1({{"A", 0.37}}) == 0.37);
  const std::map<std::string, double> row{{"BioASQ", 53.4}, {"DROP", 45.2},   {"DuoRC", 60.3},
                                          {"RACE", 44.2},   {"RE", 84.8},     {"TextbookQA", 58.0}};
  const double m = eval::macro_f1(row);
  CHECK(m == doctest::Approx(57.65).epsilon(1e-12));
  CHECK(std::abs(m - 57.6) <= 0.05 + 1e-9);
  CHECK_THROWS_AS(eval::macro_f1({}), Error);
}

TEST_CASE("aggregate_runs reports mean and sample SD per dataset") {
  const std::vector<std::map<std::string, double>> models{{{"d1", 0.5}, {"d2", 0.2}}, {{"d1", 0.7}, {"d2", 0.2}}};
  const auto r = eval::aggregate_runs("m", models);
  CHECK(r.per_dataset.at("d1").mean == doctest::Approx(0.6));
  CHECK(r.per_dataset.at("d1").sd == doctest::Approx(std::sqrt(0.02)));
  CHECK(r.per_dataset.at("d1").sd == doctest::Approx(0.1414).epsilon(1e-3));
  CHECK(r.per_dataset.at("d2").sd == 0.0);
  CHECK(r.macro == doctest::Approx(0.4));
  const std::vector<std::map<std::string, double>> ragged{{{"d1", 0.5}}, {{"d2", 0.7}}};
  CHECK_THROWS_AS(eval::aggregate_runs("m", ragged), Error);
}

TEST_CASE("aggregate_runs agrees with brute-force recomputation from raw scores") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n_models = 2 + rng.index(5), n_sets = 1 + rng.index(4);
    std::vector<std::vector<std::vector<double>>> raw(n_models, std::vector<std::vector<double>>(n_sets));
    std::vector<std::map<std::string, double>> means(n_models);
    for (std::size_t m = 0; m < n_models; ++m) {
      for (std::size_t d = 0; d < n_sets; ++d) {
        const std::size_t n = 1 + rng.index(10);
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          raw[m][d].push_back(rng.uniform());
          s += raw[m][d].back();
        }
        means[m]["d" + std::to_string(d)] = s / double(n);
      }
    }
    const auto r = eval::aggregate_runs("m", means);
    double macro = 0.0;
    for (std::size_t d = 0; d < n_sets; ++d) {
      std::vector<double> per_model;
      for (std::size_t m = 0; m < n_models; ++m) {
        double s = 0.0;
        for (double x : raw[m][d]) s += x;
        per_model.push_back(s / double(raw[m][d].size()));
      }
      double mean = 0.0;
      for (double x : per_model) mean += x / double(n_models);
      double ss = 0.0;
      for (double x : per_model) ss += (x - mean) * (x - mean);
      const auto& cell = r.per_dataset.at("d" + std::to_string(d));
      CHECK(cell.mean == doctest::Approx(mean).epsilon(1e-12));
      CHECK(cell.sd == doctest::Approx(std::sqrt(ss / double(n_models - 1))).epsilon(1e-12));
      macro += mean / double(n_sets);
    }
    CHECK(r.macro == doctest::Approx(macro).epsilon(1e-12));
  }
}

TEST_CASE("coverage follows the strict-improvement definition") {
  const std::map<std::string, double> erm{{"q1", 0.0}, {"q2", 0.5}, {"q3", 1.0}};
  const std::map<std::string, double> m{{"q1", 0.5}, {"q2", 0.4}, {"q3", 1.0}};
  const std::map<std::string, double> mp{{"q1", 0.25}, {"q2", 0.9}, {"q3", 0.0}};
  const auto rep = eval::coverage(erm, m, mp);
  REQUIRE(rep.defined());
  CHECK(*rep.percent == doctest::Approx(50.0).epsilon(1e-12));
  CHECK(rep.improved_qids == std::vector<std::string>{"q1"});

  const auto self = eval::coverage(erm, m, m);
  REQUIRE(self.defined());
  CHECK(*self.percent == 100.0);

  const auto none = eval::coverage(erm, erm, mp);
  CHECK_FALSE(none.defined());
  CHECK(none.improved_qids.empty());

  const std::map<std::string, double> short_map{{"q1", 0.0}};
  CHECK_THROWS_AS(eval::coverage(erm, short_map, mp), Error);
}

TEST_CASE("paired t-test on hand-computed differences") {
  const std::vector<double> a{1, 2, 3}, b{0, 0, 0};
  const auto r = eval::paired_t_test(a, b);
  CHECK(r.t == doctest::Approx(2.0 * std::sqrt(3.0)).epsilon(1e-12));
  CHECK(r.t == doctest::Approx(3.464).epsilon(1e-3));
  CHECK(r.p == doctest::Approx(0.0742).epsilon(1e-3));
  CHECK(r.n == 3);
  const auto swapped = eval::paired_t_test(b, a);
  CHECK(swapped.t == doctest::Approx(-r.t));
  CHECK(swapped.p == doctest::Approx(r.p));

  const auto same = eval::paired_t_test(a, a);
  CHECK(same.t == 0.0);
  CHECK(same.p == 1.0);
  CHECK_THROWS_AS(eval::paired_t_test(std::vector<double>{1, 2}, std::vector<double>{0, 1}), Error);
  CHECK_THROWS_AS(eval::paired_t_test(std::vector<double>{1}, std::vector<double>{0}), Error);
  CHECK_THROWS_AS(eval::paired_t_test(std::vector<double>{1, 2}, std::vector<double>{0}), Error);
}

TEST_CASE("paired t-test agrees with the reference implementation on random fixtures") {
  Rng rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.index(200);
    std::vector<double> a(n), b(n);
    const double shift = 0.2 * (rng.uniform() - 0.5);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = rng.uniform();
      b[i] = std::clamp(a[i] + shift + 0.3 * rng.normal(), 0.0, 1.0);
    }
    const auto got = eval::paired_t_test(a, b);
    const auto [t, p] = testing::oracle_paired_t(a, b);
    CHECK(std::abs(got.t - t) <= 1e-6 * std::max(1.0, std::abs(t)));
    CHECK(std::abs(got.p - p) <= 1e-6);
  }
}

TEST_CASE("select_checkpoint picks the best epoch and the earlier one on ties") {
  CHECK(eval::select_checkpoint({{1, 0.75}, {2, 0.77}}) == 2);
  CHECK(eval::select_checkpoint({{1, 0.77}, {2, 0.77}}) == 1);
  CHECK(eval::select_checkpoint({{1, 0.8}, {2, 0.7}, {3, 0.8}}) == 1);
}

TEST_CASE("relative gain renders with one decimal") {
  CHECK(eval::format_gain(75.0, 76.4) == "1.9%");
  CHECK(eval::format_gain(75.0, 77.2) == "2.9%");
  CHECK(eval::format_gain(50.0, 45.0) == "-10.0%");
  CHECK(eval::relative_gain_percent(75.0, 76.4) == doctest::Approx(100.0 * 1.4 / 75.0));
  CHECK_THROWS_AS(eval::relative_gain_percent(0.0, 1.0), Error);
  CHECK(eval::format_mean_sd({0.534, 0.008}) == "53.4±0.8");
}
