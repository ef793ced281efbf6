// Copyright 2026 The dgkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "dgkd/core/error.hpp"
#include "dgkd/core/matrix.hpp"

namespace dgkd::model {

/// Ordered collection of named tensors, each tagged with the parameter
/// group it belongs to ("embeddings", "block1".."blockL", "heads").
/// Gradients and update directions use the same container.
template <class T>
class BasicParameterSet {
 public:
  struct Entry {
    std::string name;
    std::string group;
    Matrix<T> value;
  };

  void add(std::string name, std::string group, Matrix<T> value) {
    if (find(name)) throw Error("duplicate parameter '" + name + "'");
    entries_.push_back({std::move(name), std::move(group), std::move(value)});
  }

  std::size_t size() const { return entries_.size(); }
  Entry& operator[](std::size_t i) { return entries_[i]; }
  const Entry& operator[](std::size_t i) const { return entries_[i]; }
  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  std::optional<std::size_t> find(const std::string& name) const {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      if (entries_[i].name == name) return i;
    }
    return std::nullopt;
  }

  std::size_t index_of(const std::string& name) const {
    if (auto i = find(name)) return *i;
    throw Error("no parameter named '" + name + "'");
  }

  /// Group names in first-appearance order.
  std::vector<std::string> groups() const {
    std::vector<std::string> out;
    for (const auto& e : entries_) {
      bool seen = false;
      for (const auto& g : out) seen = seen || g == e.group;
      if (!seen) out.push_back(e.group);
    }
    return out;
  }

  std::size_t scalar_count() const {
    std::size_t n = 0;
    for (const auto& e : entries_) n += e.value.size();
    return n;
  }

  bool operator==(const BasicParameterSet& o) const {
    if (entries_.size() != o.entries_.size()) return false;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      if (entries_[i].name != o.entries_[i].name || entries_[i].group != o.entries_[i].group ||
          !(entries_[i].value == o.entries_[i].value)) {
        return false;
      }
    }
    return true;
  }

 private:
  std::vector<Entry> entries_;
};

using ParameterSet = BasicParameterSet<double>;

/// Same names and shapes as `like`, all zeros.
ParameterSet zeros_like(const ParameterSet& like);
/// y += a·x (shapes must agree).
void axpy(ParameterSet& y, double a, const ParameterSet& x);
double dot(const ParameterSet& a, const ParameterSet& b);
double l2_norm(const ParameterSet& a);
double max_abs_diff(const ParameterSet& a, const ParameterSet& b);

}  // namespace dgkd::model
