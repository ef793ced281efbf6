// Copyright 2026 The dgkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dgkd/core/rng.hpp"

namespace dgkd::synth {

struct Candidate {
  std::size_t index = 0;
  double prob = 0.0;
};

/// Keeps the k most probable entries (ties by lower index), renormalizes,
/// keeps the smallest prefix whose mass reaches top_p, and renormalizes
/// again. Result is sorted by descending probability.
std::vector<Candidate> top_k_top_p(std::span<const double> probs, std::size_t top_k, double top_p);

/// One draw from the filtered distribution.
std::size_t sample_top_k_top_p(std::span<const double> probs, std::size_t top_k, double top_p, Rng& rng);

}  // namespace dgkd::synth
