// Copyright 2026 The dgkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "dgkd/autodiff/tape.hpp"

#include <cmath>
#include <memory>

#include "dgkd/core/error.hpp"
#include "dgkd/core/rng.hpp"

namespace dgkd::ad {
namespace {

using std::exp;
using std::log;
using std::sqrt;
using std::tanh;

// C += A·B
template <class T>
void gemm_nn(const Matrix<T>& a, const Matrix<T>& b, Matrix<T>& c) {
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  for (std::size_t i = 0; i < n; ++i) {
    T* crow = c.row(i).data();
    for (std::size_t p = 0; p < k; ++p) {
      const T aip = a(i, p);
      const T* brow = b.row(p).data();
      for (std::size_t j = 0; j < m; ++j) crow[j] += aip * brow[j];
    }
  }
}

// C += A·Bᵀ
template <class T>
void gemm_nt(const Matrix<T>& a, const Matrix<T>& b, Matrix<T>& c) {
  const std::size_t n = a.rows(), k = a.cols(), m = b.rows();
  for (std::size_t i = 0; i < n; ++i) {
    const T* arow = a.row(i).data();
    for (std::size_t j = 0; j < m; ++j) {
      const T* brow = b.row(j).data();
      T s{};
      for (std::size_t p = 0; p < k; ++p) s += arow[p] * brow[p];
      c(i, j) += s;
    }
  }
}

// C += Aᵀ·B
template <class T>
void gemm_tn(const Matrix<T>& a, const Matrix<T>& b, Matrix<T>& c) {
  const std::size_t k = a.rows(), n = a.cols(), m = b.cols();
  for (std::size_t p = 0; p < k; ++p) {
    const T* arow = a.row(p).data();
    const T* brow = b.row(p).data();
    for (std::size_t i = 0; i < n; ++i) {
      const T api = arow[i];
      T* crow = c.row(i).data();
      for (std::size_t j = 0; j < m; ++j) crow[j] += api * brow[j];
    }
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw Error(std::string("tape: ") + what);
}

bool is_valid(std::span<const std::uint8_t> mask, std::size_t i) {
  return mask.empty() || mask[i] != 0;
}

}  // namespace

template <class T>
Var Tape<T>::push(Mat value, bool requires_grad) {
  nodes_.push_back(Node{std::move(value), Mat{}, nullptr, requires_grad});
  return Var{nodes_.size() - 1};
}

template <class T>
typename Tape<T>::Mat& Tape<T>::grad_of(std::size_t id) {
  Node& node = nodes_[id];
  if (node.grad.empty() && !node.value.empty()) {
    node.grad = Mat(node.value.rows(), node.value.cols());
  }
  return node.grad;
}

template <class T>
bool Tape<T>::any_grad(std::initializer_list<Var> inputs) const {
  for (Var v : inputs) {
    if (nodes_[v.id].requires_grad) return true;
  }
  return false;
}

template <class T>
Var Tape<T>::constant(Mat value) {
  return push(std::move(value), false);
}

template <class T>
Var Tape<T>::parameter(Mat value) {
  return push(std::move(value), true);
}

template <class T>
typename Tape<T>::Mat Tape<T>::gradient(Var v) const {
  const Node& node = nodes_[v.id];
  if (node.grad.empty()) return Mat(node.value.rows(), node.value.cols());
  return node.grad;
}

template <class T>
Var Tape<T>::matmul(Var a, Var b) {
  const Mat& av = value(a);
  const Mat& bv = value(b);
  require(av.cols() == bv.rows(), "matmul shape mismatch");
  Mat out(av.rows(), bv.cols());
  gemm_nn(av, bv, out);
  const Var o = push(std::move(out), any_grad({a, b}));
  if (nodes_[o.id].requires_grad) {
    nodes_[o.id].back = [this, a, b, o] {
      const Mat& g = nodes_[o.id].grad;
      if (nodes_[a.id].requires_grad) gemm_nt(g, nodes_[b.id].value, grad_of(a.id));
      if (nodes_[b.id].requires_grad) gemm_tn(nodes_[a.id].value, g, grad_of(b.id));
    };
  }
  return o;
}

template <class T>
Var Tape<T>::add(Var a, Var b) {
  require(value(a).same_shape(value(b)), "add shape mismatch");
  Mat out = value(a);
  const Mat& bv = value(b);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  const Var o = push(std::move(out), any_grad({a, b}));
  if (nodes_[o.id].requires_grad) {
    nodes_[o.id].back = [this, a, b, o] {
      const Mat& g = nodes_[o.id].grad;
      for (Var in : {a, b}) {
        if (!nodes_[in.id].requires_grad) continue;
        Mat& gi = grad_of(in.id);
        for (std::size_t i = 0; i < g.size(); ++i) gi[i] += g[i];
      }
    };
  }
  return o;
}

template <class T>
Var Tape<T>::add_row(Var a, Var row) {
  const Mat& rv = value(row);
  require(rv.rows() == 1 && rv.cols() == value(a).cols(), "add_row shape mismatch");
  Mat out = value(a);
  for (std::size_t r = 0; r < out.rows(); ++r) {
    for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) += rv[c];
  }
  const Var o = push(std::move(out), any_grad({a, row}));
  if (nodes_[o.id].requires_grad) {
    nodes_[o.id].back = [this, a, row, o] {
      const Mat& g = nodes_[o.id].grad;
      if (nodes_[a.id].requires_grad) {
        Mat& ga = grad_of(a.id);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
      }
      if (nodes_[row.id].requires_grad) {
        Mat& gr = grad_of(row.id);
        for (std::size_t r = 0; r < g.rows(); ++r) {
          for (std::size_t c = 0; c < g.cols(); ++c) gr[c] += g(r, c);
        }
      }
    };
  }
  return o;
}

template <class T>
Var Tape<T>::scale(Var a, double factor) {
  Mat out = value(a);
  for (auto& x : out.values()) x *= T(factor);
  const Var o = push(std::move(out), any_grad({a}));
  if (nodes_[o.id].requires_grad) {
    nodes_[o.id].back = [this, a, o, factor] {
      const Mat& g = nodes_[o.id].grad;
      Mat& ga = grad_of(a.id);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * T(factor);
    };
  }
  return o;
}

template <class T>
Var Tape<T>::add_constant(Var a, double offset) {
  Mat out = value(a);
  for (auto& x : out.values()) x += T(offset);
  const Var o = push(std::move(out), any_grad({a}));
  if (nodes_[o.id].requires_grad) {
    nodes_[o.id].back = [this, a, o] {
      const Mat& g = nodes_[o.id].grad;
      Mat& ga = grad_of(a.id);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    };
  }
  return o;
}

template <class T>
Var Tape<T>::square(Var a) {
  Mat out = value(a);
  for (auto& x : out.values()) x = x * x;
  const Var o = push(std::move(out), any_grad({a}));
  if (nodes_[o.id].requires_grad) {
    nodes_[o.id].back = [this, a, o] {
      const Mat& g = nodes_[o.id].grad;
      const Mat& av = nodes_[a.id].value;
      Mat& ga = grad_of(a.id);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += T(2.0) * av[i] * g[i];
    };
  }
  return o;
}

template <class T>
Var Tape<T>::sum(Var a) {
  T total{};
  for (const auto& x : value(a).values()) total += x;
  const Var o = push(Mat(1, 1, total), any_grad({a}));
  if (nodes_[o.id].requires_grad) {
    nodes_[o.id].back = [this, a, o] {
      const T g = nodes_[o.id].grad[0];
      Mat& ga = grad_of(a.id);
      for (auto& x : ga.values()) x += g;
    };
  }
  return o;
}

template <class T>
Var Tape<T>::gelu(Var a) {
  constexpr double kC = 0.7978845608028654;  // sqrt(2/pi)
  constexpr double kA = 0.044715;
  Mat out = value(a);
  for (auto& x : out.values()) {
    const T t = tanh(T(kC) * (x + T(kA) * x * x * x));
    x = T(0.5) * x * (T(1.0) + t);
  }
  const Var o = push(std::move(out), any_grad({a}));
  if (nodes_[o.id].requires_grad) {
    nodes_[o.id].back = [this, a, o] {
      const Mat& g = nodes_[o.id].grad;
      const Mat& av = nodes_[a.id].value;
      Mat& ga = grad_of(a.id);
      for (std::size_t i = 0; i < g.size(); ++i) {
        const T x = av[i];
        const T t = tanh(T(kC) * (x + T(kA) * x * x * x));
        const T dt = (T(1.0) - t * t) * T(kC) * (T(1.0) + T(3.0 * kA) * x * x);
        ga[i] += g[i] * (T(0.5) * (T(1.0) + t) + T(0.5) * x * dt);
      }
    };
  }
  return o;
}

template <class T>
Var Tape<T>::layer_norm(Var x, Var gain, Var bias, double eps) {
  const Mat& xv = value(x);
  const Mat& gv = value(gain);
  const Mat& bv = value(bias);
  const std::size_t n = xv.rows(), m = xv.cols();
  require(gv.size() == m && bv.size() == m, "layer_norm shape mismatch");
  auto xhat = std::make_shared<Mat>(n, m);
  auto inv_std = std::make_shared<std::vector<T>>(n);
  Mat out(n, m);
  for (std::size_t r = 0; r < n; ++r) {
    T mean{};
    for (std::size_t c = 0; c < m; ++c) mean += xv(r, c);
    mean /= T(static_cast<double>(m));
    T var{};
    for (std::size_t c = 0; c < m; ++c) {
      const T d = xv(r, c) - mean;
      var += d * d;
    }
    var /= T(static_cast<double>(m));
    const T is = T(1.0) / sqrt(var + T(eps));
    (*inv_std)[r] = is;
    for (std::size_t c = 0; c < m; ++c) {
      const T h = (xv(r, c) - mean) * is;
      (*xhat)(r, c) = h;
      out(r, c) = h * gv[c] + bv[c];
    }
  }
  const Var o = push(std::move(out), any_grad({x, gain, bias}));
  if (nodes_[o.id].requires_grad) {
    nodes_[o.id].back = [this, x, gain, bias, o, xhat, inv_std, n, m] {
      const Mat& g = nodes_[o.id].grad;
      const Mat& gv2 = nodes_[gain.id].value;
      if (nodes_[gain.id].requires_grad || nodes_[bias.id].requires_grad) {
        Mat& gg = grad_of(gain.id);
        Mat& gb = grad_of(bias.id);
        for (std::size_t r = 0; r < n; ++r) {
          for (std::size_t c = 0; c < m; ++c) {
            gg[c] += g(r, c) * (*xhat)(r, c);
            gb[c] += g(r, c);
          }
        }
      }
      if (!nodes_[x.id].requires_grad) return;
      Mat& gx = grad_of(x.id);
      const T inv_m = T(1.0 / static_cast<double>(m));
      for (std::size_t r = 0; r < n; ++r) {
        T mean_dh{}, mean_dh_h{};
        for (std::size_t c = 0; c < m; ++c) {
          const T dh = g(r, c) * gv2[c];
          mean_dh += dh;
          mean_dh_h += dh * (*xhat)(r, c);
        }
        mean_dh *= inv_m;
        mean_dh_h *= inv_m;
        for (std::size_t c = 0; c < m; ++c) {
          const T dh = g(r, c) * gv2[c];
          gx(r, c) += (*inv_std)[r] * (dh - mean_dh - (*xhat)(r, c) * mean_dh_h);
        }
      }
    };
  }
  return o;
}

template <class T>
Var Tape<T>::embed(Var table, std::span<const int> ids) {
  const Mat& tv = value(table);
  Mat out(ids.size(), tv.cols());
  for (std::size_t r = 0; r < ids.size(); ++r) {
    require(ids[r] >= 0 && static_cast<std::size_t>(ids[r]) < tv.rows(), "embedding id out of range");
    const auto src = tv.row(static_cast<std::size_t>(ids[r]));
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  const Var o = push(std::move(out), any_grad({table}));
  if (nodes_[o.id].requires_grad) {
    std::vector<int> kept(ids.begin(), ids.end());
    nodes_[o.id].back = [this, table, o, kept = std::move(kept)] {
      const Mat& g = nodes_[o.id].grad;
      Mat& gt = grad_of(table.id);
      for (std::size_t r = 0; r < kept.size(); ++r) {
        auto dst = gt.row(static_cast<std::size_t>(kept[r]));
        const auto src = g.row(r);
        for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += src[c];
      }
    };
  }
  return o;
}

template <class T>
Var Tape<T>::self_attention(Var qkv, std::size_t heads, std::span<const std::uint8_t> key_valid) {
  const Mat& in = value(qkv);
  const std::size_t n = in.rows();
  require(in.cols() % 3 == 0, "attention input must be n×3d");
  const std::size_t d = in.cols() / 3;
  require(heads > 0 && d % heads == 0, "hidden size not divisible by heads");
  require(key_valid.empty() || key_valid.size() == n, "attention mask length mismatch");
  const std::size_t dh = d / heads;
  const T scale(1.0 / std::sqrt(static_cast<double>(dh)));

  auto probs = std::make_shared<std::vector<Mat>>(heads, Mat(n, n));
  Mat out(n, d);
  for (std::size_t h = 0; h < heads; ++h) {
    Mat& p = (*probs)[h];
    const std::size_t qo = h * dh, ko = d + h * dh, vo = 2 * d + h * dh;
    for (std::size_t i = 0; i < n; ++i) {
      T mx{};
      bool first = true;
      for (std::size_t j = 0; j < n; ++j) {
        if (!is_valid(key_valid, j)) continue;
        T s{};
        for (std::size_t c = 0; c < dh; ++c) s += in(i, qo + c) * in(j, ko + c);
        s *= scale;
        p(i, j) = s;
        if (first || s > mx) mx = s;
        first = false;
      }
      T z{};
      for (std::size_t j = 0; j < n; ++j) {
        if (!is_valid(key_valid, j)) continue;
        p(i, j) = exp(p(i, j) - mx);
        z += p(i, j);
      }
      for (std::size_t j = 0; j < n; ++j) {
        if (!is_valid(key_valid, j)) continue;
        p(i, j) /= z;
        const T w = p(i, j);
        for (std::size_t c = 0; c < dh; ++c) out(i, qo + c) += w * in(j, vo + c);
      }
    }
  }
  const Var o = push(std::move(out), any_grad({qkv}));
  if (nodes_[o.id].requires_grad) {
    std::vector<std::uint8_t> mask(key_valid.begin(), key_valid.end());
    nodes_[o.id].back = [this, qkv, o, probs, heads, n, d, dh, scale, mask = std::move(mask)] {
      const Mat& g = nodes_[o.id].grad;
      const Mat& in2 = nodes_[qkv.id].value;
      Mat& gin = grad_of(qkv.id);
      std::vector<T> dp(n);
      for (std::size_t h = 0; h < heads; ++h) {
        const Mat& p = (*probs)[h];
        const std::size_t qo = h * dh, ko = d + h * dh, vo = 2 * d + h * dh;
        for (std::size_t i = 0; i < n; ++i) {
          T dot{};
          for (std::size_t j = 0; j < n; ++j) {
            if (!is_valid(mask, j)) continue;
            T s{};
            for (std::size_t c = 0; c < dh; ++c) {
              s += g(i, qo + c) * in2(j, vo + c);
              gin(j, vo + c) += p(i, j) * g(i, qo + c);
            }
            dp[j] = s;
            dot += p(i, j) * s;
          }
          for (std::size_t j = 0; j < n; ++j) {
            if (!is_valid(mask, j)) continue;
            const T ds = p(i, j) * (dp[j] - dot) * scale;
            for (std::size_t c = 0; c < dh; ++c) {
              gin(i, qo + c) += ds * in2(j, ko + c);
              gin(j, ko + c) += ds * in2(i, qo + c);
            }
          }
        }
      }
    };
  }
  return o;
}

template <class T>
Var Tape<T>::dropout(Var a, double p, std::uint64_t seed) {
  if (p <= 0.0) return a;
  require(p < 1.0, "dropout probability must be < 1");
  Rng rng(seed);
  const double keep_scale = 1.0 / (1.0 - p);
  auto mask = std::make_shared<std::vector<double>>(value(a).size());
  Mat out = value(a);
  for (std::size_t i = 0; i < out.size(); ++i) {
    (*mask)[i] = rng.uniform() >= p ? keep_scale : 0.0;
    out[i] *= T((*mask)[i]);
  }
  const Var o = push(std::move(out), any_grad({a}));
  if (nodes_[o.id].requires_grad) {
    nodes_[o.id].back = [this, a, o, mask] {
      const Mat& g = nodes_[o.id].grad;
      Mat& ga = grad_of(a.id);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * T((*mask)[i]);
    };
  }
  return o;
}

template <class T>
Var Tape<T>::masked_mean_rows(Var a, std::span<const std::uint8_t> row_valid) {
  const Mat& av = value(a);
  require(row_valid.empty() || row_valid.size() == av.rows(), "row mask length mismatch");
  std::size_t count = 0;
  Mat out(1, av.cols());
  for (std::size_t r = 0; r < av.rows(); ++r) {
    if (!is_valid(row_valid, r)) continue;
    ++count;
    for (std::size_t c = 0; c < av.cols(); ++c) out[c] += av(r, c);
  }
  require(count > 0, "masked mean over zero rows");
  const T inv(1.0 / static_cast<double>(count));
  for (auto& x : out.values()) x *= inv;
  const Var o = push(std::move(out), any_grad({a}));
  if (nodes_[o.id].requires_grad) {
    std::vector<std::uint8_t> mask(row_valid.begin(), row_valid.end());
    nodes_[o.id].back = [this, a, o, inv, mask = std::move(mask)] {
      const Mat& g = nodes_[o.id].grad;
      Mat& ga = grad_of(a.id);
      for (std::size_t r = 0; r < ga.rows(); ++r) {
        if (!is_valid(mask, r)) continue;
        for (std::size_t c = 0; c < ga.cols(); ++c) ga(r, c) += g[c] * inv;
      }
    };
  }
  return o;
}

template <class T>
Var Tape<T>::column(Var a, std::size_t j) {
  const Mat& av = value(a);
  require(j < av.cols(), "column index out of range");
  Mat out(av.rows(), 1);
  for (std::size_t r = 0; r < av.rows(); ++r) out[r] = av(r, j);
  const Var o = push(std::move(out), any_grad({a}));
  if (nodes_[o.id].requires_grad) {
    nodes_[o.id].back = [this, a, o, j] {
      const Mat& g = nodes_[o.id].grad;
      Mat& ga = grad_of(a.id);
      for (std::size_t r = 0; r < g.rows(); ++r) ga(r, j) += g[r];
    };
  }
  return o;
}

template <class T>
Var Tape<T>::grad_reverse(Var a, double lambda) {
  require(lambda >= 0.0, "gradient reversal weight must be non-negative");
  const Var o = push(value(a), any_grad({a}));
  if (nodes_[o.id].requires_grad) {
    nodes_[o.id].back = [this, a, o, lambda] {
      const Mat& g = nodes_[o.id].grad;
      Mat& ga = grad_of(a.id);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += T(-lambda) * g[i];
    };
  }
  return o;
}

template <class T>
Var Tape<T>::cross_entropy(Var logits, std::size_t target, std::span<const std::uint8_t> valid) {
  const Mat& lv = value(logits);
  const std::size_t n = lv.size();
  require(valid.empty() || valid.size() == n, "cross-entropy mask length mismatch");
  require(target < n && is_valid(valid, target), "cross-entropy target outside valid positions");
  T mx = lv[target];
  for (std::size_t i = 0; i < n; ++i) {
    if (is_valid(valid, i) && lv[i] > mx) mx = lv[i];
  }
  auto probs = std::make_shared<std::vector<T>>(n, T{});
  T z{};
  for (std::size_t i = 0; i < n; ++i) {
    if (!is_valid(valid, i)) continue;
    (*probs)[i] = exp(lv[i] - mx);
    z += (*probs)[i];
  }
  for (auto& p : *probs) p /= z;
  const T loss = log(z) + mx - lv[target];
  const Var o = push(Mat(1, 1, loss), any_grad({logits}));
  if (nodes_[o.id].requires_grad) {
    nodes_[o.id].back = [this, logits, o, probs, target] {
      const T g = nodes_[o.id].grad[0];
      Mat& gl = grad_of(logits.id);
      for (std::size_t i = 0; i < gl.size(); ++i) gl[i] += g * (*probs)[i];
      gl[target] -= g;
    };
  }
  return o;
}

template <class T>
Var Tape<T>::squared_distance(Var a, const Mat& target, std::span<const std::uint8_t> row_valid) {
  const Mat& av = value(a);
  require(av.same_shape(target), "squared distance shape mismatch");
  require(row_valid.empty() || row_valid.size() == av.rows(), "row mask length mismatch");
  auto diff = std::make_shared<Mat>(av.rows(), av.cols());
  T total{};
  for (std::size_t r = 0; r < av.rows(); ++r) {
    if (!is_valid(row_valid, r)) continue;
    for (std::size_t c = 0; c < av.cols(); ++c) {
      const T d = av(r, c) - target(r, c);
      (*diff)(r, c) = d;
      total += d * d;
    }
  }
  const Var o = push(Mat(1, 1, total), any_grad({a}));
  if (nodes_[o.id].requires_grad) {
    nodes_[o.id].back = [this, a, o, diff] {
      const T g = nodes_[o.id].grad[0];
      Mat& ga = grad_of(a.id);
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += T(2.0) * g * (*diff)[i];
    };
  }
  return o;
}

template <class T>
void Tape<T>::backward(Var loss) {
  require(value(loss).size() == 1, "backward target must be a scalar");
  for (auto& node : nodes_) node.grad = Mat{};
  grad_of(loss.id)[0] = T(1.0);
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (node.back && !node.grad.empty()) node.back();
  }
}

template class Tape<double>;
template class Tape<Dual>;

}  // namespace dgkd::ad
