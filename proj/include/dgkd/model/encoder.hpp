// Copyright 2026 The dgkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dgkd/autodiff/tape.hpp"
#include "dgkd/data/types.hpp"
#include "dgkd/model/parameters.hpp"

namespace dgkd::model {

struct EncoderConfig {
  std::size_t vocab_size = 0;
  std::size_t num_layers = 2;
  std::size_t hidden_dim = 64;
  std::size_t num_heads = 2;
  std::size_t ffn_dim = 256;
  std::size_t max_len = 128;
  double dropout = 0.0;
  /// Standard deviation of the random weight init.
  double init_std = 0.02;

  /// Throws if hidden_dim is not divisible by num_heads or num_layers < 1.
  void validate() const;

  static EncoderConfig student(std::size_t vocab_size, std::size_t max_len = 128);
  static EncoderConfig teacher(std::size_t vocab_size, std::size_t max_len = 128);

  bool operator==(const EncoderConfig&) const = default;
};

/// A transformer encoder with start/end span heads and, optionally, a
/// linear domain-classifier head over the pooled representation.
struct SpanModel {
  EncoderConfig config;
  ParameterSet params;

  bool has_domain_head() const { return params.find("domain.w").has_value(); }
  std::size_t num_domains() const;
};

/// Randomly initialized model; `num_domains` > 0 adds a domain head.
SpanModel init_span_model(const EncoderConfig& config, std::uint64_t seed, std::size_t num_domains = 0);

/// Adds (or replaces) a zero-bias random domain head with `num_domains` classes.
void attach_domain_head(SpanModel& model, std::size_t num_domains, std::uint64_t seed);

/// Drops the domain head, if any.
void detach_domain_head(SpanModel& model);

/// Tensor indices of an encoder inside a ParameterSet.
struct EncoderLayout {
  struct Block {
    std::size_t w_qkv, b_qkv, w_o, b_o, ln1_g, ln1_b, w_ff1, b_ff1, w_ff2, b_ff2, ln2_g, ln2_b;
  };
  std::size_t tok, pos, seg, ln_g, ln_b;
  std::vector<Block> blocks;
  std::size_t span_w, span_b;
  std::optional<std::size_t> domain_w, domain_b;

  template <class T>
  static EncoderLayout of(const BasicParameterSet<T>& params, const EncoderConfig& config);
};

struct ForwardOptions {
  bool train = false;
  std::uint64_t dropout_seed = 0;
};

/// Nodes produced by one encoder pass on a tape.
struct EncoderGraph {
  ad::Var hidden;  // n×d final-layer states
  ad::Var logits;  // n×2: column 0 = start, column 1 = end
  std::vector<std::uint8_t> mask;  // 1 for non-padding positions
};

/// Records the encoder forward pass for `window` on `tape`. `vars` holds one
/// tape node per entry of the parameter set described by `layout`.
template <class T>
EncoderGraph encode(ad::Tape<T>& tape, std::span<const ad::Var> vars, const EncoderLayout& layout,
                    const EncoderConfig& config, const data::Window& window, const ForwardOptions& options = {});

/// Domain-classifier logits (1×num_domains) over a pooled 1×d node.
template <class T>
ad::Var domain_logits(ad::Tape<T>& tape, std::span<const ad::Var> vars, const EncoderLayout& layout, ad::Var pooled);

/// Start/end logits over every position of a window.
struct SpanLogits {
  std::vector<double> start;
  std::vector<double> end;
};

/// Eval-mode span logits; deterministic.
SpanLogits forward_span(const SpanModel& model, const data::Window& window);

/// Masked mean of final-layer hidden states over non-padding positions.
std::vector<double> pooled_repr(const SpanModel& model, const data::Window& window);

/// Final-layer hidden states (n×d), eval mode.
Matrix<double> hidden_states(const SpanModel& model, const data::Window& window);

}  // namespace dgkd::model
