#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "synmind/nncore/tape.hpp"

namespace synmind::nn {

template <typename T>
using NodeId = typename Tape<T>::NodeId;

// ---------------------------------------------------------------------------
// Raw accumulate kernels (C += ...). Callers own zero-initialization.
// ---------------------------------------------------------------------------

// C(n,m) += A(n,k) * B(k,m)
template <typename T>
void gemm_nn_acc(const T* a, const T* b, T* c, std::size_t n, std::size_t k,
                 std::size_t m) {
  for (std::size_t i = 0; i < n; ++i) {
    const T* arow = a + i * k;
    T* crow = c + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const T av = arow[p];
      const T* brow = b + p * m;
      for (std::size_t j = 0; j < m; ++j) crow[j] += av * brow[j];
    }
  }
}

// C(n,m) += A(n,k) * B(m,k)^T
template <typename T>
void gemm_nt_acc(const T* a, const T* b, T* c, std::size_t n, std::size_t k,
                 std::size_t m) {
  for (std::size_t i = 0; i < n; ++i) {
    const T* arow = a + i * k;
    T* crow = c + i * m;
    for (std::size_t j = 0; j < m; ++j) {
      const T* brow = b + j * k;
      T acc = T(0);
      for (std::size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
      crow[j] += acc;
    }
  }
}

// C(k,m) += A(n,k)^T * B(n,m)
template <typename T>
void gemm_tn_acc(const T* a, const T* b, T* c, std::size_t n, std::size_t k,
                 std::size_t m) {
  for (std::size_t i = 0; i < n; ++i) {
    const T* arow = a + i * k;
    const T* brow = b + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const T av = arow[p];
      T* crow = c + p * m;
      for (std::size_t j = 0; j < m; ++j) crow[j] += av * brow[j];
    }
  }
}

// ---------------------------------------------------------------------------
// Elementwise ops
// ---------------------------------------------------------------------------

namespace detail {

template <typename T, typename FwdFn, typename DerivFn>
NodeId<T> unary(Tape<T>& t, NodeId<T> a, FwdFn fwd, DerivFn deriv) {
  const Tensor<T>& x = t.value(a);
  Tensor<T> y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = fwd(x[i]);
  const bool ng = t.needs_grad(a);
  NodeId<T> out = t.push(std::move(y), ng, nullptr);
  if (ng) {
    t.set_backward(out, [out, a, deriv](Tape<T>& tt) {
      const Tensor<T>& g = tt.grad(out);
      const Tensor<T>& x = tt.value(a);
      const Tensor<T>& y = tt.value(out);
      Tensor<T>& ga = tt.grad(a);
      for (std::size_t i = 0; i < g.size(); ++i) {
        ga[i] += g[i] * deriv(x[i], y[i]);
      }
    });
  }
  return out;
}

template <typename T>
void require_same_shape(const Tensor<T>& a, const Tensor<T>& b,
                        const char* op) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(op) + ": shape mismatch " +
                         a.shape_string() + " vs " + b.shape_string());
  }
}

}  // namespace detail

template <typename T>
NodeId<T> add(Tape<T>& t, NodeId<T> a, NodeId<T> b) {
  const Tensor<T>&xa = t.value(a);
  const Tensor<T>& xb = t.value(b);
  detail::require_same_shape(xa, xb, "add");
  Tensor<T> y(xa.shape());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = xa[i] + xb[i];
  const bool ng = t.needs_grad(a) || t.needs_grad(b);
  NodeId<T> out = t.push(std::move(y), ng, nullptr);
  if (ng) {
    t.set_backward(out, [out, a, b](Tape<T>& tt) {
      const Tensor<T>& g = tt.grad(out);
      if (tt.needs_grad(a)) {
        Tensor<T>& ga = tt.grad(a);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
      }
      if (tt.needs_grad(b)) {
        Tensor<T>& gb = tt.grad(b);
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
      }
    });
  }
  return out;
}

template <typename T>
NodeId<T> sub(Tape<T>& t, NodeId<T> a, NodeId<T> b) {
  const Tensor<T>& xa = t.value(a);
  const Tensor<T>& xb = t.value(b);
  detail::require_same_shape(xa, xb, "sub");
  Tensor<T> y(xa.shape());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = xa[i] - xb[i];
  const bool ng = t.needs_grad(a) || t.needs_grad(b);
  NodeId<T> out = t.push(std::move(y), ng, nullptr);
  if (ng) {
    t.set_backward(out, [out, a, b](Tape<T>& tt) {
      const Tensor<T>& g = tt.grad(out);
      if (tt.needs_grad(a)) {
        Tensor<T>& ga = tt.grad(a);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
      }
      if (tt.needs_grad(b)) {
        Tensor<T>& gb = tt.grad(b);
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
      }
    });
  }
  return out;
}

template <typename T>
NodeId<T> mul(Tape<T>& t, NodeId<T> a, NodeId<T> b) {
  const Tensor<T>& xa = t.value(a);
  const Tensor<T>& xb = t.value(b);
  detail::require_same_shape(xa, xb, "mul");
  Tensor<T> y(xa.shape());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = xa[i] * xb[i];
  const bool ng = t.needs_grad(a) || t.needs_grad(b);
  NodeId<T> out = t.push(std::move(y), ng, nullptr);
  if (ng) {
    t.set_backward(out, [out, a, b](Tape<T>& tt) {
      const Tensor<T>& g = tt.grad(out);
      const Tensor<T>& xa = tt.value(a);
      const Tensor<T>& xb = tt.value(b);
      if (tt.needs_grad(a)) {
        Tensor<T>& ga = tt.grad(a);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * xb[i];
      }
      if (tt.needs_grad(b)) {
        Tensor<T>& gb = tt.grad(b);
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * xa[i];
      }
    });
  }
  return out;
}

template <typename T>
NodeId<T> neg(Tape<T>& t, NodeId<T> a) {
  return detail::unary(t, a, [](T x) { return -x; },
                       [](T, T) { return T(-1); });
}

template <typename T>
NodeId<T> scale(Tape<T>& t, NodeId<T> a, T c) {
  return detail::unary(t, a, [c](T x) { return c * x; },
                       [c](T, T) { return c; });
}

template <typename T>
NodeId<T> add_scalar(Tape<T>& t, NodeId<T> a, T c) {
  return detail::unary(t, a, [c](T x) { return x + c; },
                       [](T, T) { return T(1); });
}

template <typename T>
NodeId<T> log_op(Tape<T>& t, NodeId<T> a) {
  return detail::unary(t, a, [](T x) { return std::log(x); },
                       [](T x, T) { return T(1) / x; });
}

template <typename T>
NodeId<T> exp_op(Tape<T>& t, NodeId<T> a) {
  return detail::unary(t, a, [](T x) { return std::exp(x); },
                       [](T, T y) { return y; });
}

template <typename T>
NodeId<T> tanh_op(Tape<T>& t, NodeId<T> a) {
  return detail::unary(t, a, [](T x) { return std::tanh(x); },
                       [](T, T y) { return T(1) - y * y; });
}

template <typename T>
NodeId<T> sigmoid_op(Tape<T>& t, NodeId<T> a) {
  return detail::unary(
      t, a, [](T x) { return T(1) / (T(1) + std::exp(-x)); },
      [](T, T y) { return y * (T(1) - y); });
}

template <typename T>
NodeId<T> gelu_op(Tape<T>& t, NodeId<T> a) {
  const T inv_sqrt2 = T(1) / std::sqrt(T(2));
  const T inv_sqrt2pi = T(1) / std::sqrt(T(2) * std::numbers::pi_v<T>);
  return detail::unary(
      t, a,
      [inv_sqrt2](T x) {
        return T(0.5) * x * (T(1) + std::erf(x * inv_sqrt2));
      },
      [inv_sqrt2, inv_sqrt2pi](T x, T) {
        const T cdf = T(0.5) * (T(1) + std::erf(x * inv_sqrt2));
        const T pdf = inv_sqrt2pi * std::exp(T(-0.5) * x * x);
        return cdf + x * pdf;
      });
}

template <typename T>
NodeId<T> abs_op(Tape<T>& t, NodeId<T> a) {
  return detail::unary(t, a, [](T x) { return std::abs(x); },
                       [](T x, T) { return x > T(0) ? T(1)
                                         : (x < T(0) ? T(-1) : T(0)); });
}

/// Clamp with pass-through gradient strictly inside (lo, hi).
template <typename T>
NodeId<T> clamp_op(Tape<T>& t, NodeId<T> a, T lo, T hi) {
  return detail::unary(
      t, a, [lo, hi](T x) { return std::min(hi, std::max(lo, x)); },
      [lo, hi](T x, T) { return (x > lo && x < hi) ? T(1) : T(0); });
}

// ---------------------------------------------------------------------------
// Structural ops
// ---------------------------------------------------------------------------

template <typename T>
NodeId<T> reshape(Tape<T>& t, NodeId<T> a, std::vector<std::size_t> shape) {
  Tensor<T> y = t.value(a).reshaped(shape);
  const bool ng = t.needs_grad(a);
  NodeId<T> out = t.push(std::move(y), ng, nullptr);
  if (ng) {
    t.set_backward(out, [out, a](Tape<T>& tt) {
      const Tensor<T>& g = tt.grad(out);
      Tensor<T>& ga = tt.grad(a);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    });
  }
  return out;
}

/// Slice of the last dimension: (..., D) -> (..., len).
template <typename T>
NodeId<T> slice_last(Tape<T>& t, NodeId<T> a, std::size_t start,
                     std::size_t len) {
  const Tensor<T>& x = t.value(a);
  const std::size_t d = x.shape().back();
  if (start + len > d) {
    throw DimensionError("slice_last: [" + std::to_string(start) + ", " +
                         std::to_string(start + len) + ") exceeds last dim " +
                         std::to_string(d));
  }
  std::vector<std::size_t> yshape = x.shape();
  yshape.back() = len;
  Tensor<T> y(yshape);
  const std::size_t rows = x.size() / d;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < len; ++j) y[r * len + j] = x[r * d + start + j];
  }
  const bool ng = t.needs_grad(a);
  NodeId<T> out = t.push(std::move(y), ng, nullptr);
  if (ng) {
    t.set_backward(out, [out, a, start, len, d, rows](Tape<T>& tt) {
      const Tensor<T>& g = tt.grad(out);
      Tensor<T>& ga = tt.grad(a);
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t j = 0; j < len; ++j) {
          ga[r * d + start + j] += g[r * len + j];
        }
      }
    });
  }
  return out;
}

/// Concatenates along the last dimension.
template <typename T>
NodeId<T> concat_last(Tape<T>& t, const std::vector<NodeId<T>>& parts) {
  if (parts.empty()) throw DimensionError("concat_last: empty part list");
  std::vector<std::size_t> lead = t.value(parts[0]).shape();
  lead.pop_back();
  std::size_t total = 0;
  std::vector<std::size_t> lens;
  bool ng = false;
  for (auto p : parts) {
    std::vector<std::size_t> s = t.value(p).shape();
    const std::size_t last = s.back();
    s.pop_back();
    if (s != lead) {
      throw DimensionError("concat_last: leading dims differ");
    }
    lens.push_back(last);
    total += last;
    ng = ng || t.needs_grad(p);
  }
  std::vector<std::size_t> yshape = lead;
  yshape.push_back(total);
  Tensor<T> y(yshape);
  const std::size_t rows = y.size() / total;
  std::size_t off = 0;
  for (std::size_t pi = 0; pi < parts.size(); ++pi) {
    const Tensor<T>& x = t.value(parts[pi]);
    const std::size_t len = lens[pi];
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t j = 0; j < len; ++j) {
        y[r * total + off + j] = x[r * len + j];
      }
    }
    off += len;
  }
  NodeId<T> out = t.push(std::move(y), ng, nullptr);
  if (ng) {
    auto parts_copy = parts;
    t.set_backward(out, [out, parts_copy, lens, rows, total](Tape<T>& tt) {
      const Tensor<T>& g = tt.grad(out);
      std::size_t off = 0;
      for (std::size_t pi = 0; pi < parts_copy.size(); ++pi) {
        const std::size_t len = lens[pi];
        if (tt.needs_grad(parts_copy[pi])) {
          Tensor<T>& gp = tt.grad(parts_copy[pi]);
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t j = 0; j < len; ++j) {
              gp[r * len + j] += g[r * total + off + j];
            }
          }
        }
        off += len;
      }
    });
  }
  return out;
}

/// Concatenates rank-2 tensors along dim 0 (rows).
template <typename T>
NodeId<T> concat_rows(Tape<T>& t, const std::vector<NodeId<T>>& parts) {
  if (parts.empty()) throw DimensionError("concat_rows: empty part list");
  const std::size_t cols = t.value(parts[0]).dim(1);
  std::size_t rows = 0;
  bool ng = false;
  for (auto p : parts) {
    const Tensor<T>& x = t.value(p);
    if (x.rank() != 2 || x.dim(1) != cols) {
      throw DimensionError("concat_rows: column mismatch, " + x.shape_string());
    }
    rows += x.dim(0);
    ng = ng || t.needs_grad(p);
  }
  Tensor<T> y({rows, cols});
  std::size_t off = 0;
  for (auto p : parts) {
    const Tensor<T>& x = t.value(p);
    std::copy(x.data(), x.data() + x.size(), y.data() + off);
    off += x.size();
  }
  NodeId<T> out = t.push(std::move(y), ng, nullptr);
  if (ng) {
    auto parts_copy = parts;
    t.set_backward(out, [out, parts_copy](Tape<T>& tt) {
      const Tensor<T>& g = tt.grad(out);
      std::size_t off = 0;
      for (auto p : parts_copy) {
        const std::size_t len = tt.value(p).size();
        if (tt.needs_grad(p)) {
          Tensor<T>& gp = tt.grad(p);
          for (std::size_t i = 0; i < len; ++i) gp[i] += g[off + i];
        }
        off += len;
      }
    });
  }
  return out;
}

/// Multiplies a tensor by a scalar-shaped node (learned gate).
template <typename T>
NodeId<T> mul_scalar_node(Tape<T>& t, NodeId<T> a, NodeId<T> s) {
  const Tensor<T>& xs = t.value(s);
  if (xs.size() != 1) {
    throw DimensionError("mul_scalar_node: gate must be scalar, got " +
                         xs.shape_string());
  }
  const Tensor<T>& xa = t.value(a);
  Tensor<T> y(xa.shape());
  const T sv = xs[0];
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = sv * xa[i];
  const bool ng = t.needs_grad(a) || t.needs_grad(s);
  NodeId<T> out = t.push(std::move(y), ng, nullptr);
  if (ng) {
    t.set_backward(out, [out, a, s](Tape<T>& tt) {
      const Tensor<T>& g = tt.grad(out);
      const Tensor<T>& xa = tt.value(a);
      const T sv = tt.value(s)[0];
      if (tt.needs_grad(a)) {
        Tensor<T>& ga = tt.grad(a);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += sv * g[i];
      }
      if (tt.needs_grad(s)) {
        T acc = T(0);
        for (std::size_t i = 0; i < g.size(); ++i) acc += g[i] * xa[i];
        tt.grad(s)[0] += acc;
      }
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// Matrix multiplication: 2D x 2D, batched 3D x 3D, and 3D x broadcast 2D.
// transpose_b treats b's last two dims as transposed.
// ---------------------------------------------------------------------------

template <typename T>
NodeId<T> matmul(Tape<T>& t, NodeId<T> a, NodeId<T> b, bool transpose_b = false) {
  const Tensor<T>& xa = t.value(a);
  const Tensor<T>& xb = t.value(b);
  const std::size_t ra = xa.rank();
  const std::size_t rb = xb.rank();

  auto fail = [&]() -> DimensionError {
    return DimensionError(std::string("matmul") + (transpose_b ? "_nt" : "") +
                          ": incompatible shapes " + xa.shape_string() +
                          " vs " + xb.shape_string());
  };

  std::size_t batch = 1, n = 0, k = 0, m = 0;
  bool a_batched = (ra == 3), b_batched = (rb == 3);
  if (ra == 2) {
    n = xa.dim(0);
    k = xa.dim(1);
  } else if (ra == 3) {
    batch = xa.dim(0);
    n = xa.dim(1);
    k = xa.dim(2);
  } else {
    throw fail();
  }
  std::size_t bk = 0;
  if (rb == 2) {
    bk = transpose_b ? xb.dim(1) : xb.dim(0);
    m = transpose_b ? xb.dim(0) : xb.dim(1);
  } else if (rb == 3) {
    if (!a_batched || xb.dim(0) != batch) throw fail();
    bk = transpose_b ? xb.dim(2) : xb.dim(1);
    m = transpose_b ? xb.dim(1) : xb.dim(2);
  } else {
    throw fail();
  }
  if (bk != k) throw fail();
  if (!a_batched && b_batched) throw fail();

  Tensor<T> y(a_batched ? std::vector<std::size_t>{batch, n, m}
                        : std::vector<std::size_t>{n, m});
  const std::size_t a_stride = n * k;
  const std::size_t b_stride = b_batched ? k * m : 0;
  const std::size_t y_stride = n * m;
  for (std::size_t bi = 0; bi < batch; ++bi) {
    const T* pa = xa.data() + bi * a_stride;
    const T* pb = xb.data() + bi * b_stride;
    T* py = y.data() + bi * y_stride;
    if (transpose_b) {
      gemm_nt_acc(pa, pb, py, n, k, m);
    } else {
      gemm_nn_acc(pa, pb, py, n, k, m);
    }
  }

  const bool ng = t.needs_grad(a) || t.needs_grad(b);
  NodeId<T> out = t.push(std::move(y), ng, nullptr);
  if (ng) {
    t.set_backward(out, [out, a, b, transpose_b, batch, n, k, m, a_stride,
                         b_stride, y_stride](Tape<T>& tt) {
      const Tensor<T>& g = tt.grad(out);
      const Tensor<T>& xa = tt.value(a);
      const Tensor<T>& xb = tt.value(b);
      if (tt.needs_grad(a)) {
        Tensor<T>& ga = tt.grad(a);
        for (std::size_t bi = 0; bi < batch; ++bi) {
          const T* pg = g.data() + bi * y_stride;
          const T* pb = xb.data() + bi * b_stride;
          T* pga = ga.data() + bi * a_stride;
          if (transpose_b) {
            // y = a * b^T  =>  da += g * b
            gemm_nn_acc(pg, pb, pga, n, m, k);
          } else {
            // y = a * b    =>  da += g * b^T
            gemm_nt_acc(pg, pb, pga, n, m, k);
          }
        }
      }
      if (tt.needs_grad(b)) {
        Tensor<T>& gb = tt.grad(b);
        for (std::size_t bi = 0; bi < batch; ++bi) {
          const T* pg = g.data() + bi * y_stride;
          const T* pa = xa.data() + bi * a_stride;
          T* pgb = gb.data() + bi * b_stride;
          if (transpose_b) {
            // y = a * b^T  =>  db += g^T * a
            gemm_tn_acc(pg, pa, pgb, n, m, k);
          } else {
            // y = a * b    =>  db += a^T * g
            gemm_tn_acc(pa, pg, pgb, n, k, m);
          }
        }
      }
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// Broadcast adds
// ---------------------------------------------------------------------------

/// (..., D) + bias(D), broadcast over leading dims.
template <typename T>
NodeId<T> add_bias(Tape<T>& t, NodeId<T> a, NodeId<T> bias) {
  const Tensor<T>& x = t.value(a);
  const Tensor<T>& bv = t.value(bias);
  const std::size_t d = x.shape().back();
  if (bv.rank() != 1 || bv.dim(0) != d) {
    throw DimensionError("add_bias: bias " + bv.shape_string() +
                         " does not match last dim of " + x.shape_string());
  }
  Tensor<T> y(x.shape());
  const std::size_t rows = x.size() / d;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < d; ++j) y[r * d + j] = x[r * d + j] + bv[j];
  }
  const bool ng = t.needs_grad(a) || t.needs_grad(bias);
  NodeId<T> out = t.push(std::move(y), ng, nullptr);
  if (ng) {
    t.set_backward(out, [out, a, bias, rows, d](Tape<T>& tt) {
      const Tensor<T>& g = tt.grad(out);
      if (tt.needs_grad(a)) {
        Tensor<T>& ga = tt.grad(a);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
      }
      if (tt.needs_grad(bias)) {
        Tensor<T>& gb = tt.grad(bias);
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t j = 0; j < d; ++j) gb[j] += g[r * d + j];
        }
      }
    });
  }
  return out;
}

/// (B, N, M) + m(N, M), broadcast over the batch dim. Used for masks.
template <typename T>
NodeId<T> add_mat(Tape<T>& t, NodeId<T> a, NodeId<T> mat) {
  const Tensor<T>& x = t.value(a);
  const Tensor<T>& mv = t.value(mat);
  if (x.rank() != 3 || mv.rank() != 2 || x.dim(1) != mv.dim(0) ||
      x.dim(2) != mv.dim(1)) {
    throw DimensionError("add_mat: " + x.shape_string() + " vs " +
                         mv.shape_string());
  }
  Tensor<T> y(x.shape());
  const std::size_t batch = x.dim(0), inner = mv.size();
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t i = 0; i < inner; ++i) {
      y[b * inner + i] = x[b * inner + i] + mv[i];
    }
  }
  const bool ng = t.needs_grad(a) || t.needs_grad(mat);
  NodeId<T> out = t.push(std::move(y), ng, nullptr);
  if (ng) {
    t.set_backward(out, [out, a, mat, batch, inner](Tape<T>& tt) {
      const Tensor<T>& g = tt.grad(out);
      if (tt.needs_grad(a)) {
        Tensor<T>& ga = tt.grad(a);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
      }
      if (tt.needs_grad(mat)) {
        Tensor<T>& gm = tt.grad(mat);
        for (std::size_t b = 0; b < batch; ++b) {
          for (std::size_t i = 0; i < inner; ++i) gm[i] += g[b * inner + i];
        }
      }
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// Softmax family (over the last dimension)
// ---------------------------------------------------------------------------

template <typename T>
NodeId<T> row_softmax(Tape<T>& t, NodeId<T> a) {
  const Tensor<T>& x = t.value(a);
  const std::size_t d = x.shape().back();
  const std::size_t rows = x.size() / d;
  Tensor<T> y(x.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const T* xr = x.data() + r * d;
    T* yr = y.data() + r * d;
    T mx = xr[0];
    for (std::size_t j = 1; j < d; ++j) mx = std::max(mx, xr[j]);
    T sum = T(0);
    for (std::size_t j = 0; j < d; ++j) {
      yr[j] = std::exp(xr[j] - mx);
      sum += yr[j];
    }
    for (std::size_t j = 0; j < d; ++j) yr[j] /= sum;
  }
  const bool ng = t.needs_grad(a);
  NodeId<T> out = t.push(std::move(y), ng, nullptr);
  if (ng) {
    t.set_backward(out, [out, a, rows, d](Tape<T>& tt) {
      const Tensor<T>& g = tt.grad(out);
      const Tensor<T>& y = tt.value(out);
      Tensor<T>& ga = tt.grad(a);
      for (std::size_t r = 0; r < rows; ++r) {
        const T* gr = g.data() + r * d;
        const T* yr = y.data() + r * d;
        T dot = T(0);
        for (std::size_t j = 0; j < d; ++j) dot += gr[j] * yr[j];
        T* gar = ga.data() + r * d;
        for (std::size_t j = 0; j < d; ++j) gar[j] += yr[j] * (gr[j] - dot);
      }
    });
  }
  return out;
}

template <typename T>
NodeId<T> row_log_softmax(Tape<T>& t, NodeId<T> a) {
  const Tensor<T>& x = t.value(a);
  const std::size_t d = x.shape().back();
  const std::size_t rows = x.size() / d;
  Tensor<T> y(x.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const T* xr = x.data() + r * d;
    T* yr = y.data() + r * d;
    T mx = xr[0];
    for (std::size_t j = 1; j < d; ++j) mx = std::max(mx, xr[j]);
    T sum = T(0);
    for (std::size_t j = 0; j < d; ++j) sum += std::exp(xr[j] - mx);
    const T lse = mx + std::log(sum);
    for (std::size_t j = 0; j < d; ++j) yr[j] = xr[j] - lse;
  }
  const bool ng = t.needs_grad(a);
  NodeId<T> out = t.push(std::move(y), ng, nullptr);
  if (ng) {
    t.set_backward(out, [out, a, rows, d](Tape<T>& tt) {
      const Tensor<T>& g = tt.grad(out);
      const Tensor<T>& y = tt.value(out);
      Tensor<T>& ga = tt.grad(a);
      for (std::size_t r = 0; r < rows; ++r) {
        const T* gr = g.data() + r * d;
        const T* yr = y.data() + r * d;
        T gsum = T(0);
        for (std::size_t j = 0; j < d; ++j) gsum += gr[j];
        T* gar = ga.data() + r * d;
        for (std::size_t j = 0; j < d; ++j) {
          gar[j] += gr[j] - std::exp(yr[j]) * gsum;
        }
      }
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// Layer normalization over the last dimension, with learned gain and bias.
// ---------------------------------------------------------------------------

template <typename T>
NodeId<T> layer_norm(Tape<T>& t, NodeId<T> a, NodeId<T> gain, NodeId<T> bias,
                     T eps = T(1e-5)) {
  const Tensor<T>& x = t.value(a);
  const Tensor<T>& gv = t.value(gain);
  const Tensor<T>& bv = t.value(bias);
  const std::size_t d = x.shape().back();
  if (gv.size() != d || bv.size() != d) {
    throw DimensionError("layer_norm: gain/bias must have length " +
                         std::to_string(d));
  }
  const std::size_t rows = x.size() / d;
  Tensor<T> y(x.shape());
  Tensor<T> xhat(x.shape());
  Tensor<T> inv_std({rows});
  for (std::size_t r = 0; r < rows; ++r) {
    const T* xr = x.data() + r * d;
    T mean = T(0);
    for (std::size_t j = 0; j < d; ++j) mean += xr[j];
    mean /= T(d);
    T var = T(0);
    for (std::size_t j = 0; j < d; ++j) {
      const T c = xr[j] - mean;
      var += c * c;
    }
    var /= T(d);
    const T istd = T(1) / std::sqrt(var + eps);
    inv_std[r] = istd;
    for (std::size_t j = 0; j < d; ++j) {
      const T xh = (xr[j] - mean) * istd;
      xhat[r * d + j] = xh;
      y[r * d + j] = gv[j] * xh + bv[j];
    }
  }
  const bool ng = t.needs_grad(a) || t.needs_grad(gain) || t.needs_grad(bias);
  NodeId<T> out = t.push(std::move(y), ng, nullptr);
  if (ng) {
    t.set_backward(out, [out, a, gain, bias, rows, d,
                         xhat = std::move(xhat),
                         inv_std = std::move(inv_std)](Tape<T>& tt) {
      const Tensor<T>& g = tt.grad(out);
      const Tensor<T>& gv = tt.value(gain);
      if (tt.needs_grad(gain)) {
        Tensor<T>& gg = tt.grad(gain);
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t j = 0; j < d; ++j) {
            gg[j] += g[r * d + j] * xhat[r * d + j];
          }
        }
      }
      if (tt.needs_grad(bias)) {
        Tensor<T>& gb = tt.grad(bias);
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t j = 0; j < d; ++j) gb[j] += g[r * d + j];
        }
      }
      if (tt.needs_grad(a)) {
        Tensor<T>& ga = tt.grad(a);
        for (std::size_t r = 0; r < rows; ++r) {
          const T* gr = g.data() + r * d;
          const T* xh = xhat.data() + r * d;
          T sum_dxhat = T(0), sum_dxhat_xhat = T(0);
          for (std::size_t j = 0; j < d; ++j) {
            const T dxh = gr[j] * gv[j];
            sum_dxhat += dxh;
            sum_dxhat_xhat += dxh * xh[j];
          }
          const T istd = inv_std[r];
          for (std::size_t j = 0; j < d; ++j) {
            const T dxh = gr[j] * gv[j];
            ga[r * d + j] += istd * (dxh - (sum_dxhat +
                                            xh[j] * sum_dxhat_xhat) / T(d));
          }
        }
      }
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reductions
// ---------------------------------------------------------------------------

template <typename T>
NodeId<T> sum_all(Tape<T>& t, NodeId<T> a) {
  const Tensor<T>& x = t.value(a);
  T s = T(0);
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i];
  const bool ng = t.needs_grad(a);
  NodeId<T> out = t.push(Tensor<T>::scalar(s), ng, nullptr);
  if (ng) {
    t.set_backward(out, [out, a](Tape<T>& tt) {
      const T g = tt.grad(out)[0];
      Tensor<T>& ga = tt.grad(a);
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g;
    });
  }
  return out;
}

template <typename T>
NodeId<T> mean_all(Tape<T>& t, NodeId<T> a) {
  const std::size_t n = t.value(a).size();
  return scale(t, sum_all(t, a), T(1) / T(n));
}

}  // namespace synmind::nn
