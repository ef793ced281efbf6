// Copyright 2026 The dgkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "dgkd/synth/sampler.hpp"

#include <algorithm>
#include <numeric>

#include "dgkd/core/error.hpp"

namespace dgkd::synth {
namespace {

void renormalize(std::vector<Candidate>& c) {
  double mass = 0.0;
  for (const auto& x : c) mass += x.prob;
  for (auto& x : c) x.prob /= mass;
}

}  // namespace

std::vector<Candidate> top_k_top_p(std::span<const double> probs, std::size_t top_k, double top_p) {
  if (top_k == 0) throw Error("top_k must be >= 1");
  if (!(top_p > 0.0 && top_p <= 1.0)) throw Error("top_p must lie in (0, 1]");
  std::vector<Candidate> c;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] < 0.0) throw Error("negative probability");
    if (probs[i] > 0.0) c.push_back({i, probs[i]});
  }
  if (c.empty()) throw Error("distribution has no mass");
  std::stable_sort(c.begin(), c.end(), [](const Candidate& a, const Candidate& b) { return a.prob > b.prob; });
  if (c.size() > top_k) c.resize(top_k);
  renormalize(c);
  double cum = 0.0;
  std::size_t keep = 0;
  while (keep < c.size()) {
    cum += c[keep].prob;
    ++keep;
    if (cum >= top_p - 1e-12) break;
  }
  c.resize(keep);
  renormalize(c);
  return c;
}

std::size_t sample_top_k_top_p(std::span<const double> probs, std::size_t top_k, double top_p, Rng& rng) {
  const auto c = top_k_top_p(probs, top_k, top_p);
  if (c.size() == 1) return c.front().index;
  const double u = rng.uniform();
  double cum = 0.0;
  for (const auto& x : c) {
    cum += x.prob;
    if (u < cum) return x.index;
  }
  return c.back().index;
}

}  // namespace dgkd::synth
