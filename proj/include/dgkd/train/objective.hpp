// Copyright 2026 The dgkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dgkd/autodiff/tape.hpp"
#include "dgkd/data/types.hpp"
#include "dgkd/model/encoder.hpp"
#include "dgkd/model/split.hpp"
#include "dgkd/train/teacher_cache.hpp"

namespace dgkd::train {

/// Scalar components of one step's loss, averaged over the batch windows.
struct LossBreakdown {
  double total = 0.0;
  double task = 0.0;      // span CE or KD on the full model
  double domain = 0.0;    // unweighted domain-classifier CE
  double episodic = 0.0;  // task loss through the hybrid model
};

/// A differentiable scalar function of a ParameterSet.
class Objective {
 public:
  virtual ~Objective() = default;
  /// Loss value; writes ∇ into `grad` when non-null.
  virtual double value_and_gradient(const model::ParameterSet& params, model::ParameterSet* grad) const = 0;
  /// Hessian of the loss at `params` applied to `direction`.
  virtual model::ParameterSet hessian_vector(const model::ParameterSet& params,
                                             const model::ParameterSet& direction) const = 0;
};

enum class TaskLoss { span_ce, kd };

/// Domain-adversarial head settings. The classifier head is trained on the
/// plain domain CE; the encoder receives −λ times its gradient through the
/// reversal layer. The reported total adds λ·CE.
struct AdversarialTerm {
  double lambda = 0.1;
  std::map<std::string, std::size_t> domain_index;
};

/// Episodic hybrid: groups on the frozen side of `split` take the donor's
/// values as constants.
struct HybridTerm {
  const model::ParameterSet* donor = nullptr;
  model::ParameterSplit split;
  double weight = 0.25;
};

/// Mean loss over a batch of windows for one encoder.
class BatchObjective final : public Objective {
 public:
  BatchObjective(const model::EncoderConfig& config, std::vector<const data::Window*> windows, TaskLoss task,
                 double tau = 1.0, const TeacherLogitCache* teacher = nullptr);

  void set_task_weight(double weight) { task_weight_ = weight; }
  void set_adversarial(AdversarialTerm term) { adversarial_ = std::move(term); }
  void set_hybrid(HybridTerm term) { hybrid_ = std::move(term); }
  void set_dropout_seed(std::uint64_t seed) { dropout_seed_ = seed; }

  /// Full breakdown plus gradient (when non-null).
  LossBreakdown evaluate(const model::ParameterSet& params, model::ParameterSet* grad) const;

  double value_and_gradient(const model::ParameterSet& params, model::ParameterSet* grad) const override;
  model::ParameterSet hessian_vector(const model::ParameterSet& params,
                                     const model::ParameterSet& direction) const override;

  /// Records the objective on `tape` over parameter nodes `vars`.
  template <class T>
  ad::Var record(ad::Tape<T>& tape, const model::BasicParameterSet<T>& params, std::span<const ad::Var> vars,
                 LossBreakdown* breakdown) const;

 private:
  template <class T>
  ad::Var window_task(ad::Tape<T>& tape, const model::EncoderGraph& graph, const data::Window& w) const;

  model::EncoderConfig config_;
  std::vector<const data::Window*> windows_;
  TaskLoss task_;
  double tau_;
  const TeacherLogitCache* teacher_;
  double task_weight_ = 1.0;
  std::optional<AdversarialTerm> adversarial_;
  std::optional<HybridTerm> hybrid_;
  std::optional<std::uint64_t> dropout_seed_;
};

}  // namespace dgkd::train
