// Copyright 2026 The dgkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "dgkd/data/balancing.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "dgkd/core/error.hpp"
#include "dgkd/core/rng.hpp"

namespace dgkd::data {

std::vector<DomainDataset> upsample_domains(std::vector<DomainDataset> train_sets, std::uint64_t seed) {
  if (train_sets.empty()) throw Error("upsample_domains: no datasets");
  std::size_t target = 0;
  for (const auto& ds : train_sets) {
    if (ds.examples.empty()) throw Error("upsample_domains: dataset '" + ds.name + "' is empty");
    target = std::max(target, ds.examples.size());
  }
  for (std::size_t d = 0; d < train_sets.size(); ++d) {
    auto& ds = train_sets[d];
    const std::size_t original = ds.examples.size();
    if (original == target) continue;
    std::multimap<std::string, std::size_t> windows_by_qid;
    for (std::size_t i = 0; i < ds.windows.size(); ++i) windows_by_qid.emplace(ds.windows[i].qid, i);
    const std::size_t original_windows = ds.windows.size();
    Rng rng(derive_seed(seed, d));
    ds.examples.reserve(target);
    while (ds.examples.size() < target) {
      const std::size_t pick = rng.index(original);
      ds.examples.push_back(ds.examples[pick]);
      const auto [lo, hi] = windows_by_qid.equal_range(ds.examples[pick].qid);
      for (auto it = lo; it != hi; ++it) {
        if (it->second < original_windows) ds.windows.push_back(ds.windows[it->second]);
      }
    }
  }
  return train_sets;
}

std::vector<Batch> single_domain_batches(std::span<const DomainDataset> train_sets, std::size_t batch_size,
                                         std::uint64_t seed) {
  if (batch_size == 0) throw Error("batch size must be >= 1");
  Rng rng(seed);
  std::vector<Batch> batches;
  for (std::size_t d = 0; d < train_sets.size(); ++d) {
    const auto& ds = train_sets[d];
    std::vector<std::size_t> order(ds.windows.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);
    for (std::size_t i = 0; i < order.size(); i += batch_size) {
      Batch b{ds.name, d, {}};
      for (std::size_t j = i; j < std::min(i + batch_size, order.size()); ++j) b.windows.push_back(&ds.windows[order[j]]);
      batches.push_back(std::move(b));
    }
  }
  rng.shuffle(batches);
  return batches;
}

LeaveOneOutPlan leave_one_out_splits(std::span<const std::string> source_names) {
  if (source_names.size() < 2) throw Error("leave-one-out needs at least two sources");
  std::set<std::string> seen;
  for (const auto& n : source_names) {
    if (!seen.insert(n).second) throw Error("duplicate source name '" + n + "'");
  }
  LeaveOneOutPlan plan;
  plan.source_names.assign(source_names.begin(), source_names.end());
  for (const auto& held_out : source_names) {
    Combo combo{"minus-" + held_out, held_out, {}};
    for (const auto& n : source_names) {
      if (n != held_out) combo.sources.push_back(n);
    }
    plan.combos.push_back(std::move(combo));
  }
  return plan;
}

}  // namespace dgkd::data
