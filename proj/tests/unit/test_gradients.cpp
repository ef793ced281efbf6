// Copyright 2026 The dgkd Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "dgkd/train/losses.hpp"
#include "dgkd/train/mldg.hpp"
#include "dgkd/train/objective.hpp"
#include "oracles.hpp"

using namespace dgkd;
using testing::fd_gradient;
using testing::group_relative_error;
using testing::max_value;

namespace {

struct Fixture {
  model::SpanModel model;
  std::vector<data::Window> windows;

  explicit Fixture(std::size_t num_domains = 0, std::size_t n_windows = 2) {
    model = model::init_span_model(testing::tiny_config(), 7, num_domains);
    testing::randomize(model.params, 11);
    for (std::size_t i = 0; i < n_windows; ++i) {
      windows.push_back(testing::tiny_window(100 + i, 2, 4 + i % 2, i % 2 ? "b" : "a"));
    }
  }

  std::vector<const data::Window*> ptrs() const {
    std::vector<const data::Window*> out;
    for (const auto& w : windows) out.push_back(&w);
    return out;
  }
};

double fd_check(const train::Objective& obj, const model::ParameterSet& params) {
  model::ParameterSet analytic;
  obj.value_and_gradient(params, &analytic);
  const auto numeric = fd_gradient([&](const auto& p) { return obj.value_and_gradient(p, nullptr); }, params);
  return max_value(group_relative_error(analytic, numeric));
}

}  // namespace

TEST_CASE("tiny model stays under a thousand parameters") {
  Fixture f;
  CHECK(f.model.params.scalar_count() <= 1000);
}

TEST_CASE("span cross-entropy gradient matches finite differences on every group") {
  Fixture f(0, 1);
  train::BatchObjective obj(f.model.config, f.ptrs(), train::TaskLoss::span_ce);
  model::ParameterSet analytic;
  obj.value_and_gradient(f.model.params, &analytic);
  const auto numeric = fd_gradient([&](const auto& p) { return obj.value_and_gradient(p, nullptr); }, f.model.params);
  for (const auto& [group, err] : group_relative_error(analytic, numeric)) {
    INFO(group);
    CHECK(err < 1e-4);
  }
}

TEST_CASE("batch objective value is the mean of per-window span cross-entropy") {
  Fixture f(0, 3);
  train::BatchObjective obj(f.model.config, f.ptrs(), train::TaskLoss::span_ce);
  double expected = 0.0;
  for (const auto& w : f.windows) expected += train::span_cross_entropy(model::forward_span(f.model, w), w) / 3.0;
  CHECK(obj.value_and_gradient(f.model.params, nullptr) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("uniform logits give ln(n) per head") {
  Fixture f(0, 1);
  for (auto& e : f.model.params) {
    if (e.name == "span.w" || e.name == "span.b") std::fill(e.value.values().begin(), e.value.values().end(), 0.0);
  }
  train::BatchObjective obj(f.model.config, f.ptrs(), train::TaskLoss::span_ce);
  CHECK(obj.value_and_gradient(f.model.params, nullptr) ==
        doctest::Approx(std::log(double(f.windows[0].length()))).epsilon(1e-12));
}

TEST_CASE("KD objective gradient matches finite differences") {
  Fixture f(0, 2);
  train::TeacherLogitCache cache;
  auto teacher = model::init_span_model(f.model.config, 3);
  testing::randomize(teacher.params, 5, 0.5);
  for (const auto& w : f.windows) cache.entries[w.window_id] = model::forward_span(teacher, w);
  train::BatchObjective obj(f.model.config, f.ptrs(), train::TaskLoss::kd, 2.0, &cache);
  CHECK(fd_check(obj, f.model.params) < 1e-4);

  double expected = 0.0;
  for (const auto& w : f.windows) {
    expected += train::span_kd_loss(model::forward_span(f.model, w), cache.at(w.window_id), 2.0) / 2.0;
  }
  CHECK(obj.value_and_gradient(f.model.params, nullptr) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("gradient reversal scales the encoder gradient of the domain loss by -lambda") {
  Fixture f(2, 2);
  const std::map<std::string, std::size_t> index{{"a", 0}, {"b", 1}};
  // Domain loss alone: task weight 0.
  auto domain_only = [&](double lambda) {
    train::BatchObjective obj(f.model.config, f.ptrs(), train::TaskLoss::span_ce);
    obj.set_task_weight(0.0);
    obj.set_adversarial({lambda, index});
    model::ParameterSet g;
    obj.evaluate(f.model.params, &g);
    return g;
  };
  // Finite differences of the unreversed domain CE.
  train::BatchObjective probe(f.model.config, f.ptrs(), train::TaskLoss::span_ce);
  probe.set_task_weight(0.0);
  probe.set_adversarial({0.0, index});
  const auto numeric =
      fd_gradient([&](const auto& p) { return probe.evaluate(p, nullptr).domain; }, f.model.params);

  for (double lambda : {1.0, 0.1}) {
    const auto g = domain_only(lambda);
    auto expected = numeric;
    for (std::size_t i = 0; i < expected.size(); ++i) {
      if (expected[i].group != "heads") {
        for (auto& x : expected[i].value.values()) x *= -lambda;
      } else if (expected[i].name.rfind("span.", 0) == 0) {
        for (auto& x : expected[i].value.values()) x = 0.0;
      }
    }
    INFO("lambda = " << lambda);
    CHECK(max_value(group_relative_error(g, expected)) < 1e-4);
  }

  const auto zero = domain_only(0.0);
  for (const auto& e : zero) {
    if (e.group == "heads") continue;
    for (double x : e.value.values()) CHECK(x == 0.0);
  }
}

TEST_CASE("episodic hybrid gradient matches finite differences for both sides") {
  Fixture f(0, 2);
  auto donor = model::init_span_model(f.model.config, 13);
  testing::randomize(donor.params, 17);
  for (auto side : {model::SplitSide::lower, model::SplitSide::upper}) {
    INFO("side " << static_cast<int>(side));
    train::BatchObjective obj(f.model.config, f.ptrs(), train::TaskLoss::span_ce);
    obj.set_task_weight(0.25);
    obj.set_hybrid({&donor.params, model::split_parameters(f.model, 1, side), 0.75});
    CHECK(fd_check(obj, f.model.params) < 1e-4);
  }
}

TEST_CASE("grad_reverse backward rule") {
  const std::vector<double> g{1.0, -2.0, 0.5};
  CHECK(train::grad_reverse(g, 1.0) == std::vector<double>{-1.0, 2.0, -0.5});
  for (double x : train::grad_reverse(g, 0.0)) CHECK(x == 0.0);
  CHECK_THROWS(train::grad_reverse(g, -1.0));
}

TEST_CASE("Hessian-vector product matches finite differences of the gradient") {
  Fixture f(0, 1);
  train::BatchObjective obj(f.model.config, f.ptrs(), train::TaskLoss::span_ce);
  auto v = model::zeros_like(f.model.params);
  testing::randomize(v, 99, 1.0);
  const auto hv = obj.hessian_vector(f.model.params, v);
  const double h = 1e-5;
  auto plus = f.model.params, minus = f.model.params;
  model::axpy(plus, h, v);
  model::axpy(minus, -h, v);
  model::ParameterSet gp, gm;
  obj.value_and_gradient(plus, &gp);
  obj.value_and_gradient(minus, &gm);
  auto numeric = gp;
  model::axpy(numeric, -1.0, gm);
  for (auto& e : numeric) {
    for (auto& x : e.value.values()) x /= 2.0 * h;
  }
  CHECK(max_value(group_relative_error(hv, numeric)) < 1e-5);
}

namespace {

/// f(θ) = Σ c·(θ − shift)² over a single 1×1 tensor, with exact derivatives.
class Quadratic final : public train::Objective {
 public:
  explicit Quadratic(double shift) : shift_(shift) {}
  double value_and_gradient(const model::ParameterSet& p, model::ParameterSet* grad) const override {
    const double x = p[0].value[0];
    if (grad) {
      *grad = model::zeros_like(p);
      (*grad)[0].value[0] = 2.0 * (x - shift_);
    }
    return (x - shift_) * (x - shift_);
  }
  model::ParameterSet hessian_vector(const model::ParameterSet& p, const model::ParameterSet& v) const override {
    auto out = model::zeros_like(p);
    out[0].value[0] = 2.0 * v[0].value[0];
    return out;
  }

 private:
  double shift_;
};

model::ParameterSet scalar(double x) {
  model::ParameterSet p;
  p.add("theta", "heads", Matrix<double>(1, 1, x));
  return p;
}

}  // namespace

TEST_CASE("MLDG scalar probe") {
  const Quadratic tr(0.0), te(1.0);
  const auto full = train::mldg_meta_gradient(tr, te, scalar(1.0), 0.1, 1.0, false);
  CHECK(std::abs(full.adapted[0].value[0] - 0.8) < 1e-12);
  CHECK(std::abs(full.meta_objective - 1.04) < 1e-12);
  CHECK(std::abs(full.gradient[0].value[0] - 1.68) < 1e-9);

  // Oracle: central differences of F(θ) = θ² + (θ − αθ·2 − 1)².
  auto F = [](double t) {
    const double tp = t - 0.1 * 2.0 * t;
    return t * t + (tp - 1.0) * (tp - 1.0);
  };
  CHECK(std::abs((F(1.0 + 1e-6) - F(1.0 - 1e-6)) / 2e-6 - 1.68) < 1e-8);

  // First order: 2θ + β·2(θ′ − 1) with θ′ held constant.
  const auto fo = train::mldg_meta_gradient(tr, te, scalar(1.0), 0.1, 1.0, true);
  CHECK(std::abs(fo.gradient[0].value[0] - (2.0 + 2.0 * (0.8 - 1.0))) < 1e-12);
  CHECK(std::abs(full.gradient[0].value[0] - fo.gradient[0].value[0]) > 0.0);

  const auto no_test = train::mldg_meta_gradient(tr, te, scalar(1.0), 0.1, 0.0, false);
  CHECK(no_test.gradient[0].value[0] == doctest::Approx(2.0));
}

TEST_CASE("MLDG full meta-gradient matches finite differences of F on the tiny encoder") {
  Fixture f(0, 2);
  train::BatchObjective tr(f.model.config, {&f.windows[0]}, train::TaskLoss::span_ce);
  train::BatchObjective te(f.model.config, {&f.windows[1]}, train::TaskLoss::span_ce);
  const double alpha = 0.05, beta = 1.0;
  const auto meta = train::mldg_meta_gradient(tr, te, f.model.params, alpha, beta, false);
  auto F = [&](const model::ParameterSet& p) {
    model::ParameterSet g;
    const double ltr = tr.value_and_gradient(p, &g);
    auto adapted = p;
    model::axpy(adapted, -alpha, g);
    return ltr + beta * te.value_and_gradient(adapted, nullptr);
  };
  const auto numeric = fd_gradient(F, f.model.params);
  CHECK(max_value(group_relative_error(meta.gradient, numeric)) < 1e-3);

  const auto fo = train::mldg_meta_gradient(tr, te, f.model.params, alpha, beta, true);
  CHECK(model::max_abs_diff(meta.gradient, fo.gradient) > 0.0);
  // First order = ∇L_tr(θ) + β∇L_te(θ′) with θ′ frozen.
  model::ParameterSet g_tr, g_te;
  tr.value_and_gradient(f.model.params, &g_tr);
  te.value_and_gradient(meta.adapted, &g_te);
  model::axpy(g_tr, beta, g_te);
  CHECK(model::max_abs_diff(g_tr, fo.gradient) < 1e-12);
}

TEST_CASE("MLDG meta-gradient tends to the joint gradient as alpha vanishes") {
  Fixture f(0, 2);
  train::BatchObjective tr(f.model.config, {&f.windows[0]}, train::TaskLoss::span_ce);
  train::BatchObjective te(f.model.config, {&f.windows[1]}, train::TaskLoss::span_ce);
  const auto meta = train::mldg_meta_gradient(tr, te, f.model.params, 1e-8, 1.0, false);
  model::ParameterSet a, b;
  tr.value_and_gradient(f.model.params, &a);
  te.value_and_gradient(f.model.params, &b);
  model::axpy(a, 1.0, b);
  CHECK(max_value(group_relative_error(meta.gradient, a)) < 1e-4);
}
