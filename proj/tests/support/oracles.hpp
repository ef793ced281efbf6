// Copyright 2026 The dgkd Authors
// SPDX-License-Identifier: Apache-2.0

// Independent reference computations used by the unit and acceptance tests.

#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "dgkd/core/rng.hpp"
#include "dgkd/data/tokenizer.hpp"
#include "dgkd/data/types.hpp"
#include "dgkd/model/encoder.hpp"

namespace dgkd::testing {

inline model::EncoderConfig tiny_config(std::size_t layers = 2) {
  model::EncoderConfig c;
  c.vocab_size = 8;
  c.num_layers = layers;
  c.hidden_dim = 8;
  c.num_heads = 2;
  c.ffn_dim = 4;
  c.max_len = 10;
  return c;
}

/// [CLS] q.. [SEP] p.. [SEP] with random ids; label inside the passage.
inline data::Window tiny_window(std::uint64_t seed, std::size_t q_len = 2, std::size_t p_len = 5,
                                std::string domain = "a", std::size_t vocab = 8) {
  Rng rng(seed);
  data::Window w;
  w.window_id = "w" + std::to_string(seed) + "@0";
  w.qid = "w" + std::to_string(seed);
  w.domain = std::move(domain);
  w.token_ids.push_back(data::kClsId);
  for (std::size_t i = 0; i < q_len; ++i) w.token_ids.push_back(4 + static_cast<int>(rng.index(vocab - 4)));
  w.token_ids.push_back(data::kSepId);
  w.question_span = {1, 1 + q_len};
  const std::size_t p0 = w.token_ids.size();
  for (std::size_t i = 0; i < p_len; ++i) w.token_ids.push_back(4 + static_cast<int>(rng.index(vocab - 4)));
  w.passage_span = {p0, p0 + p_len};
  w.token_ids.push_back(data::kSepId);
  w.char_offsets.assign(w.token_ids.size(), {-1, -1});
  for (std::size_t i = 0; i < p_len; ++i) w.char_offsets[p0 + i] = {static_cast<int>(2 * i), static_cast<int>(2 * i + 1)};
  const std::size_t s = p0 + rng.index(p_len);
  const std::size_t e = s + rng.index(p0 + p_len - s);
  w.label = data::SpanLabel{s, e};
  return w;
}

/// Re-draws every tensor entry from N(0, stddev²) (gains around 1).
inline void randomize(model::ParameterSet& params, std::uint64_t seed, double stddev = 0.3) {
  Rng rng(seed);
  for (auto& e : params) {
    const bool gain = e.name.size() > 2 && e.name.substr(e.name.size() - 2) == ".g";
    for (auto& x : e.value.values()) x = (gain ? 1.0 : 0.0) + stddev * rng.normal();
  }
}

/// Central finite differences of f at params.
inline model::ParameterSet fd_gradient(const std::function<double(const model::ParameterSet&)>& f,
                                       const model::ParameterSet& params, double h = 1e-4) {
  auto grad = model::zeros_like(params);
  auto probe = params;
  for (std::size_t i = 0; i < params.size(); ++i) {
    for (std::size_t k = 0; k < params[i].value.size(); ++k) {
      const double x = params[i].value[k];
      probe[i].value[k] = x + h;
      const double up = f(probe);
      probe[i].value[k] = x - h;
      const double down = f(probe);
      probe[i].value[k] = x;
      grad[i].value[k] = (up - down) / (2.0 * h);
    }
  }
  return grad;
}

/// ‖a − b‖ / max(‖a‖, ‖b‖) per parameter group (0 when both vanish).
inline std::map<std::string, double> group_relative_error(const model::ParameterSet& a, const model::ParameterSet& b) {
  std::map<std::string, std::array<double, 3>> acc;
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto& s = acc[a[i].group];
    for (std::size_t k = 0; k < a[i].value.size(); ++k) {
      const double x = a[i].value[k], y = b[i].value[k];
      s[0] += (x - y) * (x - y);
      s[1] += x * x;
      s[2] += y * y;
    }
  }
  std::map<std::string, double> out;
  for (const auto& [g, s] : acc) {
    const double scale = std::sqrt(std::max(s[1], s[2]));
    out[g] = scale == 0.0 ? 0.0 : std::sqrt(s[0]) / scale;
  }
  return out;
}

inline double max_value(const std::map<std::string, double>& m) {
  double best = 0.0;
  for (const auto& [k, v] : m) best = std::max(best, v);
  return best;
}

/// Short answer-like string over a vocabulary heavy in articles and punctuation.
inline std::string random_text(Rng& rng) {
  static const std::vector<std::string> words{"the", "a",   "An",  "cat", "Cat.", "dog", "dog,", "(dog)",
                                              "'",   "--",  "x",   "y",   "Y!",   "zed", "of",   "Of"};
  std::string out;
  const std::size_t n = rng.index(6);
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) out += rng.index(4) == 0 ? "  " : " ";
    out += words[rng.index(words.size())];
  }
  return out;
}

/// Bag-of-tokens F1 written independently of the library scorer: the text
/// is normalized character by character into a cleaned string first.
inline std::vector<std::string> oracle_tokens(const std::string& text) {
  std::vector<std::string> raw;
  std::string cur;
  for (char c : text + " ") {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
      if (!cur.empty()) raw.push_back(cur);
      cur.clear();
    } else {
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
  }
  std::vector<std::string> out;
  for (const auto& t : raw) {
    std::string core = t;
    while (!core.empty() && std::ispunct(static_cast<unsigned char>(core.front()))) core.erase(core.begin());
    while (!core.empty() && std::ispunct(static_cast<unsigned char>(core.back()))) core.pop_back();
    if (core.empty()) core = t;
    if (core == "a" || core == "an" || core == "the") continue;
    out.push_back(core);
  }
  return out;
}

inline double oracle_f1(const std::string& pred, const std::string& gold) {
  auto p = oracle_tokens(pred);
  auto g = oracle_tokens(gold);
  if (p.empty() || g.empty()) return p.empty() && g.empty() ? 1.0 : 0.0;
  std::sort(p.begin(), p.end());
  std::sort(g.begin(), g.end());
  std::vector<std::string> common;
  std::set_intersection(p.begin(), p.end(), g.begin(), g.end(), std::back_inserter(common));
  if (common.empty()) return 0.0;
  const double prec = double(common.size()) / double(p.size());
  const double rec = double(common.size()) / double(g.size());
  return 2 * prec * rec / (prec + rec);
}

/// Regularized incomplete beta I_x(a, b) by Lentz's continued fraction.
inline double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  if (x > (a + 1.0) / (a + b + 2.0)) return 1.0 - incomplete_beta(b, a, 1.0 - x);
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double tiny = 1e-300;
  double c = 1.0, d = 1.0 - (a + b) * x / (a + 1.0);
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double f = d;
  for (int m = 1; m < 10000; ++m) {
    const double m2 = 2.0 * m;
    double num = m * (b - m) * x / ((a + m2 - 1.0) * (a + m2));
    d = 1.0 + num * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + num / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    f *= d * c;
    num = -(a + m) * (a + b + m) * x / ((a + m2) * (a + m2 + 1.0));
    d = 1.0 + num * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + num / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-15) break;
  }
  return std::exp(ln_front) * f / a;
}

/// Two-tailed p of Student's t: I_{ν/(ν+t²)}(ν/2, 1/2).
inline double oracle_t_p(double t, double dof) { return incomplete_beta(dof / 2.0, 0.5, dof / (dof + t * t)); }

/// Textbook paired t-test: returns {t, p}.
inline std::pair<double, double> oracle_paired_t(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double mean = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) mean += (a[i] - b[i]) / n;
  double ss = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) ss += (a[i] - b[i] - mean) * (a[i] - b[i] - mean);
  const double t = mean / std::sqrt(ss / (n - 1.0) / n);
  return {t, oracle_t_p(t, n - 1.0)};
}

}  // namespace dgkd::testing
