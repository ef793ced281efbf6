// Copyright 2026 The dgkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "dgkd/model/encoder.hpp"

#include <numeric>

#include "dgkd/core/rng.hpp"
#include "dgkd/data/windowing.hpp"

namespace dgkd::model {
namespace {

Matrix<double> normal_matrix(std::size_t rows, std::size_t cols, double stddev, Rng& rng) {
  Matrix<double> m(rows, cols);
  for (auto& x : m.values()) x = stddev * rng.normal();
  return m;
}

Matrix<double> filled(std::size_t rows, std::size_t cols, double value) { return Matrix<double>(rows, cols, value); }

std::string block_name(std::size_t layer) { return "block" + std::to_string(layer); }

}  // namespace

void EncoderConfig::validate() const {
  if (num_layers < 1) throw Error("encoder needs at least one layer");
  if (num_heads == 0 || hidden_dim % num_heads != 0) throw Error("hidden_dim must be divisible by num_heads");
  if (vocab_size < 4) throw Error("vocab_size must cover the special tokens");
  if (max_len < 4) throw Error("max_len too small");
  if (ffn_dim == 0) throw Error("ffn_dim must be positive");
  if (dropout < 0.0 || dropout >= 1.0) throw Error("dropout must be in [0, 1)");
  if (!(init_std > 0.0)) throw Error("init_std must be positive");
}

EncoderConfig EncoderConfig::student(std::size_t vocab_size, std::size_t max_len) {
  return {vocab_size, 2, 64, 2, 256, max_len, 0.0, 0.02};
}

EncoderConfig EncoderConfig::teacher(std::size_t vocab_size, std::size_t max_len) {
  return {vocab_size, 4, 128, 4, 512, max_len, 0.0, 0.02};
}

std::size_t SpanModel::num_domains() const {
  const auto i = params.find("domain.w");
  return i ? params[*i].value.cols() : 0;
}

SpanModel init_span_model(const EncoderConfig& config, std::uint64_t seed, std::size_t num_domains) {
  config.validate();
  Rng rng(seed);
  const std::size_t d = config.hidden_dim, f = config.ffn_dim;
  SpanModel m{config, {}};
  auto& p = m.params;
  p.add("emb.tok", "embeddings", normal_matrix(config.vocab_size, d, config.init_std, rng));
  p.add("emb.pos", "embeddings", normal_matrix(config.max_len, d, config.init_std, rng));
  p.add("emb.seg", "embeddings", normal_matrix(2, d, config.init_std, rng));
  p.add("emb.ln.g", "embeddings", filled(1, d, 1.0));
  p.add("emb.ln.b", "embeddings", filled(1, d, 0.0));
  for (std::size_t l = 1; l <= config.num_layers; ++l) {
    const std::string g = block_name(l);
    p.add(g + ".attn.w_qkv", g, normal_matrix(d, 3 * d, config.init_std, rng));
    p.add(g + ".attn.b_qkv", g, filled(1, 3 * d, 0.0));
    p.add(g + ".attn.w_o", g, normal_matrix(d, d, config.init_std, rng));
    p.add(g + ".attn.b_o", g, filled(1, d, 0.0));
    p.add(g + ".ln1.g", g, filled(1, d, 1.0));
    p.add(g + ".ln1.b", g, filled(1, d, 0.0));
    p.add(g + ".ff.w1", g, normal_matrix(d, f, config.init_std, rng));
    p.add(g + ".ff.b1", g, filled(1, f, 0.0));
    p.add(g + ".ff.w2", g, normal_matrix(f, d, config.init_std, rng));
    p.add(g + ".ff.b2", g, filled(1, d, 0.0));
    p.add(g + ".ln2.g", g, filled(1, d, 1.0));
    p.add(g + ".ln2.b", g, filled(1, d, 0.0));
  }
  p.add("span.w", "heads", normal_matrix(d, 2, config.init_std, rng));
  p.add("span.b", "heads", filled(1, 2, 0.0));
  if (num_domains > 0) attach_domain_head(m, num_domains, derive_seed(seed, 0xd0));
  return m;
}

void attach_domain_head(SpanModel& model, std::size_t num_domains, std::uint64_t seed) {
  detach_domain_head(model);
  Rng rng(seed);
  model.params.add("domain.w", "heads", normal_matrix(model.config.hidden_dim, num_domains, model.config.init_std, rng));
  model.params.add("domain.b", "heads", filled(1, num_domains, 0.0));
}

void detach_domain_head(SpanModel& model) {
  if (!model.has_domain_head()) return;
  ParameterSet kept;
  for (auto& e : model.params) {
    if (e.name != "domain.w" && e.name != "domain.b") kept.add(e.name, e.group, e.value);
  }
  model.params = std::move(kept);
}

template <class T>
EncoderLayout EncoderLayout::of(const BasicParameterSet<T>& params, const EncoderConfig& config) {
  EncoderLayout l{};
  l.tok = params.index_of("emb.tok");
  l.pos = params.index_of("emb.pos");
  l.seg = params.index_of("emb.seg");
  l.ln_g = params.index_of("emb.ln.g");
  l.ln_b = params.index_of("emb.ln.b");
  for (std::size_t i = 1; i <= config.num_layers; ++i) {
    const std::string g = block_name(i);
    l.blocks.push_back({params.index_of(g + ".attn.w_qkv"), params.index_of(g + ".attn.b_qkv"),
                        params.index_of(g + ".attn.w_o"), params.index_of(g + ".attn.b_o"),
                        params.index_of(g + ".ln1.g"), params.index_of(g + ".ln1.b"),
                        params.index_of(g + ".ff.w1"), params.index_of(g + ".ff.b1"),
                        params.index_of(g + ".ff.w2"), params.index_of(g + ".ff.b2"),
                        params.index_of(g + ".ln2.g"), params.index_of(g + ".ln2.b")});
  }
  l.span_w = params.index_of("span.w");
  l.span_b = params.index_of("span.b");
  l.domain_w = params.find("domain.w");
  l.domain_b = params.find("domain.b");
  const auto& tok = params[l.tok].value;
  if (tok.rows() != config.vocab_size || tok.cols() != config.hidden_dim ||
      params[l.pos].value.rows() != config.max_len) {
    throw Error("parameter shapes do not match encoder config");
  }
  return l;
}

template EncoderLayout EncoderLayout::of(const BasicParameterSet<double>&, const EncoderConfig&);
template EncoderLayout EncoderLayout::of(const BasicParameterSet<ad::Dual>&, const EncoderConfig&);

template <class T>
EncoderGraph encode(ad::Tape<T>& tape, std::span<const ad::Var> vars, const EncoderLayout& layout,
                    const EncoderConfig& config, const data::Window& window, const ForwardOptions& options) {
  const std::size_t n = window.token_ids.size();
  if (n == 0 || n > config.max_len) throw Error("window length outside [1, max_len]: " + window.window_id);

  EncoderGraph out;
  out.mask = data::token_mask(window);
  std::vector<int> positions(n);
  std::iota(positions.begin(), positions.end(), 0);
  std::vector<int> segments(n);
  for (std::size_t i = 0; i < n; ++i) segments[i] = i >= window.passage_span.begin ? 1 : 0;

  std::uint64_t dropout_tag = 0;
  auto drop = [&](ad::Var x) {
    if (!options.train || config.dropout <= 0.0) return x;
    return tape.dropout(x, config.dropout, derive_seed(options.dropout_seed, dropout_tag++));
  };

  ad::Var x = tape.add(tape.embed(vars[layout.tok], window.token_ids), tape.embed(vars[layout.pos], positions));
  x = tape.add(x, tape.embed(vars[layout.seg], segments));
  x = drop(tape.layer_norm(x, vars[layout.ln_g], vars[layout.ln_b]));

  for (const auto& b : layout.blocks) {
    ad::Var qkv = tape.add_row(tape.matmul(x, vars[b.w_qkv]), vars[b.b_qkv]);
    ad::Var attn = tape.self_attention(qkv, config.num_heads, out.mask);
    attn = drop(tape.add_row(tape.matmul(attn, vars[b.w_o]), vars[b.b_o]));
    x = tape.layer_norm(tape.add(x, attn), vars[b.ln1_g], vars[b.ln1_b]);
    ad::Var h = tape.gelu(tape.add_row(tape.matmul(x, vars[b.w_ff1]), vars[b.b_ff1]));
    h = drop(tape.add_row(tape.matmul(h, vars[b.w_ff2]), vars[b.b_ff2]));
    x = tape.layer_norm(tape.add(x, h), vars[b.ln2_g], vars[b.ln2_b]);
  }
  out.hidden = x;
  out.logits = tape.add_row(tape.matmul(x, vars[layout.span_w]), vars[layout.span_b]);
  return out;
}

template EncoderGraph encode(ad::Tape<double>&, std::span<const ad::Var>, const EncoderLayout&,
                             const EncoderConfig&, const data::Window&, const ForwardOptions&);
template EncoderGraph encode(ad::Tape<ad::Dual>&, std::span<const ad::Var>, const EncoderLayout&,
                             const EncoderConfig&, const data::Window&, const ForwardOptions&);

template <class T>
ad::Var domain_logits(ad::Tape<T>& tape, std::span<const ad::Var> vars, const EncoderLayout& layout,
                      ad::Var pooled) {
  if (!layout.domain_w || !layout.domain_b) throw Error("model has no domain head");
  return tape.add_row(tape.matmul(pooled, vars[*layout.domain_w]), vars[*layout.domain_b]);
}

template ad::Var domain_logits(ad::Tape<double>&, std::span<const ad::Var>, const EncoderLayout&, ad::Var);
template ad::Var domain_logits(ad::Tape<ad::Dual>&, std::span<const ad::Var>, const EncoderLayout&, ad::Var);

namespace {

struct EvalPass {
  ad::Tape<double> tape;
  EncoderGraph graph;
};

void run_eval(const SpanModel& model, const data::Window& window, EvalPass& pass) {
  const auto layout = EncoderLayout::of(model.params, model.config);
  std::vector<ad::Var> vars;
  vars.reserve(model.params.size());
  for (const auto& e : model.params) vars.push_back(pass.tape.constant(e.value));
  pass.graph = encode(pass.tape, vars, layout, model.config, window);
}

}  // namespace

SpanLogits forward_span(const SpanModel& model, const data::Window& window) {
  EvalPass pass;
  run_eval(model, window, pass);
  const auto& lv = pass.tape.value(pass.graph.logits);
  SpanLogits out;
  out.start.resize(lv.rows());
  out.end.resize(lv.rows());
  for (std::size_t i = 0; i < lv.rows(); ++i) {
    out.start[i] = lv(i, 0);
    out.end[i] = lv(i, 1);
  }
  return out;
}

std::vector<double> pooled_repr(const SpanModel& model, const data::Window& window) {
  EvalPass pass;
  run_eval(model, window, pass);
  const auto pooled = pass.tape.masked_mean_rows(pass.graph.hidden, pass.graph.mask);
  return pass.tape.value(pooled).values();
}

Matrix<double> hidden_states(const SpanModel& model, const data::Window& window) {
  EvalPass pass;
  run_eval(model, window, pass);
  return pass.tape.value(pass.graph.hidden);
}

}  // namespace dgkd::model
