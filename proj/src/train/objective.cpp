// Copyright 2026 The dgkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "dgkd/train/objective.hpp"

#include "dgkd/core/error.hpp"
#include "dgkd/core/hash.hpp"
#include "dgkd/core/rng.hpp"

namespace dgkd::train {
namespace {

template <class T>
Matrix<T> lift(const Matrix<double>& m) {
  if constexpr (std::is_same_v<T, double>) {
    return m;
  } else {
    Matrix<T> out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.size(); ++i) out[i] = T(m[i]);
    return out;
  }
}

std::uint64_t window_tag(const std::string& id) {
  Fnv1a h;
  h.update(id);
  return h.digest();
}

}  // namespace

BatchObjective::BatchObjective(const model::EncoderConfig& config, std::vector<const data::Window*> windows,
                               TaskLoss task, double tau, const TeacherLogitCache* teacher)
    : config_(config), windows_(std::move(windows)), task_(task), tau_(tau), teacher_(teacher) {
  if (windows_.empty()) throw Error("objective over an empty batch");
  if (task_ == TaskLoss::kd) {
    if (teacher_ == nullptr) throw Error("KD objective needs a teacher logit cache");
    if (!(tau_ > 0.0)) throw Error("tau must be positive");
  }
  for (const auto* w : windows_) {
    if (task_ == TaskLoss::span_ce && !w->labeled()) {
      throw Error("training window " + w->window_id + " has no gold answer span");
    }
    if (task_ == TaskLoss::kd) {
      const auto& t = teacher_->at(w->window_id);
      if (t.start.size() != w->length()) throw Error("teacher logits for " + w->window_id + " have the wrong length");
    }
  }
}

template <class T>
ad::Var BatchObjective::window_task(ad::Tape<T>& tape, const model::EncoderGraph& graph,
                                    const data::Window& w) const {
  if (task_ == TaskLoss::span_ce) {
    const ad::Var s = tape.cross_entropy(tape.column(graph.logits, 0), w.label->start, graph.mask);
    const ad::Var e = tape.cross_entropy(tape.column(graph.logits, 1), w.label->end, graph.mask);
    return tape.scale(tape.add(s, e), 0.5);
  }
  const auto& t = teacher_->at(w.window_id);
  Matrix<T> target(w.length(), 2);
  for (std::size_t i = 0; i < w.length(); ++i) {
    target(i, 0) = T(t.start[i] / tau_);
    target(i, 1) = T(t.end[i] / tau_);
  }
  return tape.squared_distance(graph.logits, target, {});
}

template <class T>
ad::Var BatchObjective::record(ad::Tape<T>& tape, const model::BasicParameterSet<T>& params,
                               std::span<const ad::Var> vars, LossBreakdown* breakdown) const {
  const auto layout = model::EncoderLayout::of(params, config_);
  if (adversarial_ && !layout.domain_w) throw Error("domain-adversarial objective needs a domain head");

  std::vector<ad::Var> hybrid_vars;
  if (hybrid_ && hybrid_->weight > 0.0) {
    if (hybrid_->donor == nullptr) throw Error("episodic objective needs a donor model");
    for (std::size_t i = 0; i < params.size(); ++i) {
      if (hybrid_->split.is_trainable(params[i].group)) {
        hybrid_vars.push_back(vars[i]);
      } else {
        const auto& donor = (*hybrid_->donor)[hybrid_->donor->index_of(params[i].name)].value;
        if (donor.rows() != params[i].value.rows() || donor.cols() != params[i].value.cols()) throw Error("donor tensor " + params[i].name + " has the wrong shape");
        hybrid_vars.push_back(tape.constant(lift<T>(donor)));
      }
    }
  }

  const double inv_n = 1.0 / static_cast<double>(windows_.size());
  std::optional<ad::Var> total;
  auto accumulate = [&](ad::Var term, double weight) {
    const ad::Var scaled = tape.scale(term, weight * inv_n);
    total = total ? tape.add(*total, scaled) : scaled;
  };
  LossBreakdown acc;
  for (const auto* w : windows_) {
    model::ForwardOptions fwd;
    if (dropout_seed_) fwd = {true, derive_seed(*dropout_seed_, window_tag(w->window_id))};
    const auto graph = model::encode(tape, vars, layout, config_, *w, fwd);
    const ad::Var task = window_task(tape, graph, *w);
    acc.task += ad::value_of(tape.scalar(task)) * inv_n;
    if (task_weight_ != 0.0) accumulate(task, task_weight_);

    if (adversarial_) {
      const auto it = adversarial_->domain_index.find(w->domain);
      if (it == adversarial_->domain_index.end()) throw Error("no domain class for '" + w->domain + "'");
      const ad::Var pooled = tape.masked_mean_rows(graph.hidden, graph.mask);
      const ad::Var reversed = tape.grad_reverse(pooled, adversarial_->lambda);
      const ad::Var dl = model::domain_logits(tape, vars, layout, reversed);
      const ad::Var ce = tape.cross_entropy(dl, it->second, {});
      acc.domain += ad::value_of(tape.scalar(ce)) * inv_n;
      accumulate(ce, 1.0);
    }

    if (!hybrid_vars.empty()) {
      if (dropout_seed_) fwd.dropout_seed = derive_seed(fwd.dropout_seed, 0xe9);
      const auto hybrid = model::encode(tape, hybrid_vars, layout, config_, *w, fwd);
      const ad::Var ep = window_task(tape, hybrid, *w);
      acc.episodic += ad::value_of(tape.scalar(ep)) * inv_n;
      accumulate(ep, hybrid_->weight);
    }
  }
  acc.total = task_weight_ * acc.task;
  if (adversarial_) acc.total += adversarial_->lambda * acc.domain;
  if (hybrid_) acc.total += hybrid_->weight * acc.episodic;
  if (breakdown != nullptr) *breakdown = acc;
  if (!total) total = tape.constant(Matrix<T>(1, 1, T(0.0)));
  return *total;
}

template ad::Var BatchObjective::record(ad::Tape<double>&, const model::BasicParameterSet<double>&,
                                        std::span<const ad::Var>, LossBreakdown*) const;
template ad::Var BatchObjective::record(ad::Tape<ad::Dual>&, const model::BasicParameterSet<ad::Dual>&,
                                        std::span<const ad::Var>, LossBreakdown*) const;

LossBreakdown BatchObjective::evaluate(const model::ParameterSet& params, model::ParameterSet* grad) const {
  ad::Tape<double> tape;
  std::vector<ad::Var> vars;
  vars.reserve(params.size());
  for (const auto& e : params) vars.push_back(grad ? tape.parameter(e.value) : tape.constant(e.value));
  LossBreakdown out;
  const ad::Var loss = record(tape, params, vars, &out);
  if (grad != nullptr) {
    tape.backward(loss);
    *grad = model::zeros_like(params);
    for (std::size_t i = 0; i < params.size(); ++i) (*grad)[i].value = tape.gradient(vars[i]);
  }
  return out;
}

double BatchObjective::value_and_gradient(const model::ParameterSet& params, model::ParameterSet* grad) const {
  return evaluate(params, grad).total;
}

model::ParameterSet BatchObjective::hessian_vector(const model::ParameterSet& params,
                                                   const model::ParameterSet& direction) const {
  model::BasicParameterSet<ad::Dual> dual;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& v = params[i].value;
    const auto& d = direction[i].value;
    if (!v.same_shape(d)) throw Error("direction shape mismatch for " + params[i].name);
    Matrix<ad::Dual> m(v.rows(), v.cols());
    for (std::size_t k = 0; k < v.size(); ++k) m[k] = ad::Dual(v[k], d[k]);
    dual.add(params[i].name, params[i].group, std::move(m));
  }
  ad::Tape<ad::Dual> tape;
  std::vector<ad::Var> vars;
  vars.reserve(dual.size());
  for (const auto& e : dual) vars.push_back(tape.parameter(e.value));
  const ad::Var loss = record(tape, dual, vars, nullptr);
  tape.backward(loss);
  auto out = model::zeros_like(params);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto g = tape.gradient(vars[i]);
    for (std::size_t k = 0; k < g.size(); ++k) out[i].value[k] = g[k].d;
  }
  return out;
}

}  // namespace dgkd::train
