// Copyright 2026 The dgkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "dgkd/autodiff/dual.hpp"
#include "dgkd/core/matrix.hpp"

namespace dgkd::ad {

/// Handle to a node recorded on a Tape.
struct Var {
  std::size_t id = std::numeric_limits<std::size_t>::max();
  bool valid() const { return id != std::numeric_limits<std::size_t>::max(); }
};

/// Reverse-mode automatic differentiation over dense matrices.
///
/// Every op evaluates eagerly and records a closure that accumulates input
/// gradients. Instantiated for `double` (first-order training) and `Dual`
/// (Hessian-vector products by forward-over-reverse). A tape is single-use:
/// record, call backward() once, read gradients.
template <class T>
class Tape {
 public:
  using Mat = Matrix<T>;

  /// Leaf that never receives a gradient.
  Var constant(Mat value);
  /// Leaf whose gradient is accumulated by backward().
  Var parameter(Mat value);

  const Mat& value(Var v) const { return nodes_[v.id].value; }
  T scalar(Var v) const { return nodes_[v.id].value[0]; }
  bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }
  /// Gradient of the last backward() target; zeros if the node was unreached.
  Mat gradient(Var v) const;
  std::size_t size() const { return nodes_.size(); }

  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  /// a (n×m) + broadcast row (1×m).
  Var add_row(Var a, Var row);
  Var scale(Var a, double factor);
  Var add_constant(Var a, double offset);
  Var square(Var a);
  Var sum(Var a);
  Var gelu(Var a);
  Var layer_norm(Var x, Var gain, Var bias, double eps = 1e-5);
  /// Rows of `table` selected by `ids`.
  Var embed(Var table, std::span<const int> ids);
  /// Multi-head scaled dot-product self-attention over a fused n×3d
  /// [Q | K | V] input. Keys with key_valid[j] == 0 get zero weight.
  Var self_attention(Var qkv, std::size_t heads, std::span<const std::uint8_t> key_valid);
  /// Inverted dropout with a mask derived from `seed`; identity when p == 0.
  Var dropout(Var a, double p, std::uint64_t seed);
  /// Mean over rows with row_valid[r] != 0; result is 1×m.
  Var masked_mean_rows(Var a, std::span<const std::uint8_t> row_valid);
  /// Column j of a as an n×1 matrix.
  Var column(Var a, std::size_t j);
  /// Identity forward; backward multiplies the upstream gradient by −lambda.
  Var grad_reverse(Var a, double lambda);
  /// −log softmax(logits)[target] over elements with valid[i] != 0
  /// (logits flattened row-major). Result is 1×1.
  Var cross_entropy(Var logits, std::size_t target, std::span<const std::uint8_t> valid);
  /// Σ over rows with row_valid[r] != 0 of ‖a_r − target_r‖². Result is 1×1.
  Var squared_distance(Var a, const Mat& target, std::span<const std::uint8_t> row_valid);

  /// Seeds d(loss)/d(loss) = 1 and propagates to every reachable node.
  void backward(Var loss);

 private:
  struct Node {
    Mat value;
    Mat grad;
    std::function<void()> back;
    bool requires_grad = false;
  };

  Var push(Mat value, bool requires_grad);
  Mat& grad_of(std::size_t id);
  bool any_grad(std::initializer_list<Var> inputs) const;

  std::vector<Node> nodes_;
};

extern template class Tape<double>;
extern template class Tape<Dual>;

}  // namespace dgkd::ad
