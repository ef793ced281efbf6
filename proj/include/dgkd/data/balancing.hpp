// Copyright 2026 The dgkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dgkd/data/types.hpp"

namespace dgkd::data {

/// Pads every dataset to the largest example count by sampling examples
/// uniformly with replacement. Originals keep their order and come first;
/// windows of a sampled example are appended alongside it.
std::vector<DomainDataset> upsample_domains(std::vector<DomainDataset> train_sets, std::uint64_t seed);

/// A mini-batch drawn from a single domain.
struct Batch {
  std::string domain;
  std::size_t dataset_index = 0;
  std::vector<const Window*> windows;
};

/// One epoch of single-domain batches. Each domain's windows are shuffled
/// and chunked (a final short batch per domain is allowed), then the batch
/// order across domains is shuffled. Pointers refer into `train_sets`.
std::vector<Batch> single_domain_batches(std::span<const DomainDataset> train_sets, std::size_t batch_size,
                                         std::uint64_t seed);

/// n combinations of n−1 sources, combo i omitting source_names[i].
LeaveOneOutPlan leave_one_out_splits(std::span<const std::string> source_names);

}  // namespace dgkd::data
