// Copyright 2026 The dgkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "dgkd/model/parameters.hpp"

#include <algorithm>

namespace dgkd::model {
namespace {

void check_aligned(const ParameterSet& a, const ParameterSet& b) {
  if (a.size() != b.size()) throw Error("parameter sets differ in tensor count");
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].name != b[i].name || !a[i].value.same_shape(b[i].value)) {
      throw Error("parameter sets disagree at '" + a[i].name + "'");
    }
  }
}

}  // namespace

ParameterSet zeros_like(const ParameterSet& like) {
  ParameterSet out;
  for (const auto& e : like) out.add(e.name, e.group, Matrix<double>(e.value.rows(), e.value.cols()));
  return out;
}

void axpy(ParameterSet& y, double a, const ParameterSet& x) {
  check_aligned(y, x);
  for (std::size_t i = 0; i < y.size(); ++i) {
    auto& yv = y[i].value.values();
    const auto& xv = x[i].value.values();
    for (std::size_t j = 0; j < yv.size(); ++j) yv[j] += a * xv[j];
  }
}

double dot(const ParameterSet& a, const ParameterSet& b) {
  check_aligned(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& av = a[i].value.values();
    const auto& bv = b[i].value.values();
    for (std::size_t j = 0; j < av.size(); ++j) s += av[j] * bv[j];
  }
  return s;
}

double l2_norm(const ParameterSet& a) { return std::sqrt(dot(a, a)); }

double max_abs_diff(const ParameterSet& a, const ParameterSet& b) {
  check_aligned(a, b);
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& av = a[i].value.values();
    const auto& bv = b[i].value.values();
    for (std::size_t j = 0; j < av.size(); ++j) m = std::max(m, std::abs(av[j] - bv[j]));
  }
  return m;
}

}  // namespace dgkd::model
