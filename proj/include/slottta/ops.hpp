#pragma once

#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

#include "slottta/kernels.hpp"
#include "slottta/tape.hpp"

// Differentiable operations over tape variables. Each builder validates
// shapes, runs the forward kernel, and registers a backward closure that
// accumulates into the input gradients. No implicit broadcasting: binary ops
// demand equal shapes, scalar variants take a plain number.
namespace slottta::ops {

template <typename T>
using K = kern::Kern<T>;

namespace detail {

template <typename T>
void require_2d(const Tensor<T>& t, const char* who) {
  if (t.rank() != 2) throw ShapeError(std::string(who) + ": expected a 2-d tensor, got " + shape_str(t.shape));
}

template <typename T>
void transpose_buf(const T* src, T* dst, int rows, int cols) {
  constexpr int kTile = 32;
  for (int i0 = 0; i0 < rows; i0 += kTile) {
    const int i1 = std::min(rows, i0 + kTile);
    for (int j0 = 0; j0 < cols; j0 += kTile) {
      const int j1 = std::min(cols, j0 + kTile);
      for (int i = i0; i < i1; ++i)
        for (int j = j0; j < j1; ++j) dst[static_cast<size_t>(j) * rows + i] = src[static_cast<size_t>(i) * cols + j];
    }
  }
}

}  // namespace detail

// ---- structure ----------------------------------------------------------

template <typename T>
Var matmul(Tape<T>& t, Var a, Var b) {
  const auto& av = t.value(a);
  const auto& bv = t.value(b);
  detail::require_2d(av, "matmul");
  detail::require_2d(bv, "matmul");
  if (av.dim(1) != bv.dim(0))
    throw ShapeError("matmul: inner dimensions disagree, " + shape_str(av.shape) + " vs " + shape_str(bv.shape));
  const int m = av.dim(0), k = av.dim(1), n = bv.dim(1);
  Tensor<T> out = Tensor<T>::zeros({m, n});
  K<T>::gemm(av.data.data(), bv.data.data(), out.data.data(), m, k, n, false);
  const bool rg = t.requires_grad(a) || t.requires_grad(b);
  return t.make(std::move(out), rg, [a, b, m, k, n](Tape<T>& tp, Var self) {
    const std::vector<T>& dc = tp.grad_ref(self);
    if (tp.requires_grad(a)) {
      // dA += dC * B^T
      std::vector<T> bt(static_cast<size_t>(k) * n);
      detail::transpose_buf(tp.value(b).data.data(), bt.data(), k, n);
      K<T>::gemm(dc.data(), bt.data(), tp.grad_buf(a).data(), m, n, k, true);
    }
    if (tp.requires_grad(b)) {
      // dB += A^T * dC
      std::vector<T> at(static_cast<size_t>(m) * k);
      detail::transpose_buf(tp.value(a).data.data(), at.data(), m, k);
      K<T>::gemm(at.data(), dc.data(), tp.grad_buf(b).data(), k, m, n, true);
    }
  });
}

template <typename T>
Var transpose(Tape<T>& t, Var x) {
  const auto& xv = t.value(x);
  detail::require_2d(xv, "transpose");
  const int r = xv.dim(0), c = xv.dim(1);
  Tensor<T> out = Tensor<T>::zeros({c, r});
  detail::transpose_buf(xv.data.data(), out.data.data(), r, c);
  return t.make(std::move(out), t.requires_grad(x), [x, r, c](Tape<T>& tp, Var self) {
    if (!tp.requires_grad(x)) return;
    const std::vector<T>& dy = tp.grad_ref(self);
    std::vector<T>& dx = tp.grad_buf(x);
    for (int i = 0; i < c; ++i)
      for (int j = 0; j < r; ++j) dx[static_cast<size_t>(j) * c + i] += dy[static_cast<size_t>(i) * r + j];
  });
}

template <typename T>
Var reshape(Tape<T>& t, Var x, Shape s) {
  const auto& xv = t.value(x);
  if (shape_numel(s) != xv.numel())
    throw ShapeError("reshape: cannot view " + shape_str(xv.shape) + " as " + shape_str(s));
  Tensor<T> out(std::move(s), xv.data);
  return t.make(std::move(out), t.requires_grad(x), [x](Tape<T>& tp, Var self) {
    if (!tp.requires_grad(x)) return;
    const std::vector<T>& dy = tp.grad_ref(self);
    K<T>::add(dy.data(), tp.grad_buf(x).data(), tp.grad_buf(x).data(), dy.size());
  });
}

template <typename T>
Var slice_rows(Tape<T>& t, Var x, int start, int len) {
  const auto& xv = t.value(x);
  detail::require_2d(xv, "slice_rows");
  const int r = xv.dim(0), c = xv.dim(1);
  if (start < 0 || len < 1 || start + len > r)
    throw ShapeError("slice_rows: range [" + std::to_string(start) + ", " + std::to_string(start + len) +
                     ") outside " + shape_str(xv.shape));
  Tensor<T> out = Tensor<T>::zeros({len, c});
  std::memcpy(out.data.data(), xv.data.data() + static_cast<size_t>(start) * c, sizeof(T) * out.data.size());
  return t.make(std::move(out), t.requires_grad(x), [x, start, c](Tape<T>& tp, Var self) {
    if (!tp.requires_grad(x)) return;
    const std::vector<T>& dy = tp.grad_ref(self);
    T* dst = tp.grad_buf(x).data() + static_cast<size_t>(start) * c;
    K<T>::add(dy.data(), dst, dst, dy.size());
  });
}

template <typename T>
Var slice_cols(Tape<T>& t, Var x, int start, int len) {
  const auto& xv = t.value(x);
  detail::require_2d(xv, "slice_cols");
  const int r = xv.dim(0), c = xv.dim(1);
  if (start < 0 || len < 1 || start + len > c)
    throw ShapeError("slice_cols: range [" + std::to_string(start) + ", " + std::to_string(start + len) +
                     ") outside " + shape_str(xv.shape));
  Tensor<T> out = Tensor<T>::zeros({r, len});
  for (int i = 0; i < r; ++i)
    std::memcpy(out.data.data() + static_cast<size_t>(i) * len, xv.data.data() + static_cast<size_t>(i) * c + start,
                sizeof(T) * static_cast<size_t>(len));
  return t.make(std::move(out), t.requires_grad(x), [x, start, len, r, c](Tape<T>& tp, Var self) {
    if (!tp.requires_grad(x)) return;
    const std::vector<T>& dy = tp.grad_ref(self);
    std::vector<T>& dx = tp.grad_buf(x);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < len; ++j) dx[static_cast<size_t>(i) * c + start + j] += dy[static_cast<size_t>(i) * len + j];
  });
}

template <typename T>
Var concat_rows(Tape<T>& t, const std::vector<Var>& parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no inputs");
  const int c = t.value(parts[0]).dim(1);
  int rows = 0;
  bool rg = false;
  for (Var p : parts) {
    const auto& pv = t.value(p);
    detail::require_2d(pv, "concat_rows");
    if (pv.dim(1) != c)
      throw ShapeError("concat_rows: column counts disagree, " + shape_str(t.value(parts[0]).shape) + " vs " +
                       shape_str(pv.shape));
    rows += pv.dim(0);
    rg = rg || t.requires_grad(p);
  }
  Tensor<T> out = Tensor<T>::zeros({rows, c});
  size_t off = 0;
  for (Var p : parts) {
    const auto& pv = t.value(p);
    std::memcpy(out.data.data() + off, pv.data.data(), sizeof(T) * pv.data.size());
    off += pv.data.size();
  }
  return t.make(std::move(out), rg, [parts](Tape<T>& tp, Var self) {
    const std::vector<T>& dy = tp.grad_ref(self);
    size_t off = 0;
    for (Var p : parts) {
      const size_t n = tp.value(p).data.size();
      if (tp.requires_grad(p)) {
        T* dst = tp.grad_buf(p).data();
        K<T>::add(dy.data() + off, dst, dst, n);
      }
      off += n;
    }
  });
}

template <typename T>
Var concat_cols(Tape<T>& t, const std::vector<Var>& parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  const int r = t.value(parts[0]).dim(0);
  int cols = 0;
  bool rg = false;
  for (Var p : parts) {
    const auto& pv = t.value(p);
    detail::require_2d(pv, "concat_cols");
    if (pv.dim(0) != r)
      throw ShapeError("concat_cols: row counts disagree, " + shape_str(t.value(parts[0]).shape) + " vs " +
                       shape_str(pv.shape));
    cols += pv.dim(1);
    rg = rg || t.requires_grad(p);
  }
  Tensor<T> out = Tensor<T>::zeros({r, cols});
  int coff = 0;
  for (Var p : parts) {
    const auto& pv = t.value(p);
    const int pc = pv.dim(1);
    for (int i = 0; i < r; ++i)
      std::memcpy(out.data.data() + static_cast<size_t>(i) * cols + coff, pv.data.data() + static_cast<size_t>(i) * pc,
                  sizeof(T) * static_cast<size_t>(pc));
    coff += pc;
  }
  return t.make(std::move(out), rg, [parts, r, cols](Tape<T>& tp, Var self) {
    const std::vector<T>& dy = tp.grad_ref(self);
    int coff = 0;
    for (Var p : parts) {
      const int pc = tp.value(p).dim(1);
      if (tp.requires_grad(p)) {
        std::vector<T>& dx = tp.grad_buf(p);
        for (int i = 0; i < r; ++i)
          for (int j = 0; j < pc; ++j)
            dx[static_cast<size_t>(i) * pc + j] += dy[static_cast<size_t>(i) * cols + coff + j];
      }
      coff += pc;
    }
  });
}

// Gathers rows by index (duplicates allowed); backward scatter-adds.
template <typename T>
Var gather_rows(Tape<T>& t, Var x, const std::vector<int>& indices) {
  const auto& xv = t.value(x);
  detail::require_2d(xv, "gather_rows");
  const int r = xv.dim(0), c = xv.dim(1);
  Tensor<T> out = Tensor<T>::zeros({static_cast<int>(indices.size()), c});
  for (size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] < 0 || indices[i] >= r)
      throw InputError("gather_rows: index " + std::to_string(indices[i]) + " outside " + shape_str(xv.shape));
    std::memcpy(out.data.data() + i * c, xv.data.data() + static_cast<size_t>(indices[i]) * c,
                sizeof(T) * static_cast<size_t>(c));
  }
  return t.make(std::move(out), t.requires_grad(x), [x, indices, c](Tape<T>& tp, Var self) {
    if (!tp.requires_grad(x)) return;
    const std::vector<T>& dy = tp.grad_ref(self);
    std::vector<T>& dx = tp.grad_buf(x);
    for (size_t i = 0; i < indices.size(); ++i) {
      T* dst = dx.data() + static_cast<size_t>(indices[i]) * c;
      K<T>::add(dy.data() + i * c, dst, dst, c);
    }
  });
}

// [1 x d] -> [rows x d]; backward sums over rows.
template <typename T>
Var tile_rows(Tape<T>& t, Var x, int rows) {
  const auto& xv = t.value(x);
  detail::require_2d(xv, "tile_rows");
  if (xv.dim(0) != 1) throw ShapeError("tile_rows: expected a single row, got " + shape_str(xv.shape));
  const int d = xv.dim(1);
  Tensor<T> out = Tensor<T>::zeros({rows, d});
  for (int i = 0; i < rows; ++i)
    std::memcpy(out.data.data() + static_cast<size_t>(i) * d, xv.data.data(), sizeof(T) * static_cast<size_t>(d));
  return t.make(std::move(out), t.requires_grad(x), [x, rows, d](Tape<T>& tp, Var self) {
    if (!tp.requires_grad(x)) return;
    const std::vector<T>& dy = tp.grad_ref(self);
    std::vector<T>& dx = tp.grad_buf(x);
    for (int i = 0; i < rows; ++i) K<T>::add(dy.data() + static_cast<size_t>(i) * d, dx.data(), dx.data(), d);
  });
}

// [r x 1] -> [r x cols]; backward sums over columns.
template <typename T>
Var tile_cols(Tape<T>& t, Var x, int cols) {
  const auto& xv = t.value(x);
  detail::require_2d(xv, "tile_cols");
  if (xv.dim(1) != 1) throw ShapeError("tile_cols: expected a single column, got " + shape_str(xv.shape));
  const int r = xv.dim(0);
  Tensor<T> out = Tensor<T>::zeros({r, cols});
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < cols; ++j) out.data[static_cast<size_t>(i) * cols + j] = xv.data[static_cast<size_t>(i)];
  return t.make(std::move(out), t.requires_grad(x), [x, r, cols](Tape<T>& tp, Var self) {
    if (!tp.requires_grad(x)) return;
    const std::vector<T>& dy = tp.grad_ref(self);
    std::vector<T>& dx = tp.grad_buf(x);
    for (int i = 0; i < r; ++i) {
      T s = 0;
      for (int j = 0; j < cols; ++j) s += dy[static_cast<size_t>(i) * cols + j];
      dx[static_cast<size_t>(i)] += s;
    }
  });
}

// ---- elementwise ---------------------------------------------------------

namespace detail {

template <typename T>
void require_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* who) {
  if (a.shape != b.shape)
    throw ShapeError(std::string(who) + ": shapes disagree, " + shape_str(a.shape) + " vs " + shape_str(b.shape));
}

}  // namespace detail

template <typename T>
Var add(Tape<T>& t, Var a, Var b) {
  const auto& av = t.value(a);
  const auto& bv = t.value(b);
  detail::require_same_shape(av, bv, "add");
  Tensor<T> out = Tensor<T>::zeros(av.shape);
  K<T>::add(av.data.data(), bv.data.data(), out.data.data(), out.data.size());
  return t.make(std::move(out), t.requires_grad(a) || t.requires_grad(b), [a, b](Tape<T>& tp, Var self) {
    const std::vector<T>& dy = tp.grad_ref(self);
    if (tp.requires_grad(a)) K<T>::add(dy.data(), tp.grad_buf(a).data(), tp.grad_buf(a).data(), dy.size());
    if (tp.requires_grad(b)) K<T>::add(dy.data(), tp.grad_buf(b).data(), tp.grad_buf(b).data(), dy.size());
  });
}

template <typename T>
Var sub(Tape<T>& t, Var a, Var b) {
  const auto& av = t.value(a);
  const auto& bv = t.value(b);
  detail::require_same_shape(av, bv, "sub");
  Tensor<T> out = Tensor<T>::zeros(av.shape);
  K<T>::sub(av.data.data(), bv.data.data(), out.data.data(), out.data.size());
  return t.make(std::move(out), t.requires_grad(a) || t.requires_grad(b), [a, b](Tape<T>& tp, Var self) {
    const std::vector<T>& dy = tp.grad_ref(self);
    if (tp.requires_grad(a)) K<T>::add(dy.data(), tp.grad_buf(a).data(), tp.grad_buf(a).data(), dy.size());
    if (tp.requires_grad(b)) K<T>::axpy(T(-1), dy.data(), tp.grad_buf(b).data(), dy.size());
  });
}

template <typename T>
Var mul(Tape<T>& t, Var a, Var b) {
  const auto& av = t.value(a);
  const auto& bv = t.value(b);
  detail::require_same_shape(av, bv, "mul");
  Tensor<T> out = Tensor<T>::zeros(av.shape);
  K<T>::mul(av.data.data(), bv.data.data(), out.data.data(), out.data.size());
  return t.make(std::move(out), t.requires_grad(a) || t.requires_grad(b), [a, b](Tape<T>& tp, Var self) {
    const std::vector<T>& dy = tp.grad_ref(self);
    const size_t n = dy.size();
    std::vector<T> tmp(n);
    if (tp.requires_grad(a)) {
      K<T>::mul(dy.data(), tp.value(b).data.data(), tmp.data(), n);
      K<T>::add(tmp.data(), tp.grad_buf(a).data(), tp.grad_buf(a).data(), n);
    }
    if (tp.requires_grad(b)) {
      K<T>::mul(dy.data(), tp.value(a).data.data(), tmp.data(), n);
      K<T>::add(tmp.data(), tp.grad_buf(b).data(), tp.grad_buf(b).data(), n);
    }
  });
}

template <typename T>
Var div(Tape<T>& t, Var a, Var b) {
  const auto& av = t.value(a);
  const auto& bv = t.value(b);
  detail::require_same_shape(av, bv, "div");
  Tensor<T> out = Tensor<T>::zeros(av.shape);
  K<T>::div(av.data.data(), bv.data.data(), out.data.data(), out.data.size());
  return t.make(std::move(out), t.requires_grad(a) || t.requires_grad(b), [a, b](Tape<T>& tp, Var self) {
    const std::vector<T>& dy = tp.grad_ref(self);
    const std::vector<T>& yv = tp.value(self).data;
    const std::vector<T>& bd = tp.value(b).data;
    const size_t n = dy.size();
    if (tp.requires_grad(a)) {
      std::vector<T>& da = tp.grad_buf(a);
      for (size_t i = 0; i < n; ++i) da[i] += dy[i] / bd[i];
    }
    if (tp.requires_grad(b)) {
      std::vector<T>& db = tp.grad_buf(b);
      for (size_t i = 0; i < n; ++i) db[i] -= dy[i] * yv[i] / bd[i];
    }
  });
}

template <typename T>
Var add_scalar(Tape<T>& t, Var x, T s) {
  const auto& xv = t.value(x);
  Tensor<T> out = xv;
  out.grad.clear();
  for (T& v : out.data) v += s;
  return t.make(std::move(out), t.requires_grad(x), [x](Tape<T>& tp, Var self) {
    if (!tp.requires_grad(x)) return;
    const std::vector<T>& dy = tp.grad_ref(self);
    K<T>::add(dy.data(), tp.grad_buf(x).data(), tp.grad_buf(x).data(), dy.size());
  });
}

template <typename T>
Var mul_scalar(Tape<T>& t, Var x, T s) {
  const auto& xv = t.value(x);
  Tensor<T> out = Tensor<T>::zeros(xv.shape);
  K<T>::scale(xv.data.data(), s, out.data.data(), out.data.size());
  return t.make(std::move(out), t.requires_grad(x), [x, s](Tape<T>& tp, Var self) {
    if (!tp.requires_grad(x)) return;
    const std::vector<T>& dy = tp.grad_ref(self);
    K<T>::axpy(s, dy.data(), tp.grad_buf(x).data(), dy.size());
  });
}

template <typename T>
Var relu(Tape<T>& t, Var x) {
  const auto& xv = t.value(x);
  Tensor<T> out = Tensor<T>::zeros(xv.shape);
  K<T>::relu(xv.data.data(), out.data.data(), out.data.size());
  return t.make(std::move(out), t.requires_grad(x), [x](Tape<T>& tp, Var self) {
    if (!tp.requires_grad(x)) return;
    const std::vector<T>& dy = tp.grad_ref(self);
    K<T>::relu_bwd(tp.value(x).data.data(), dy.data(), tp.grad_buf(x).data(), dy.size());
  });
}

template <typename T>
Var sigmoid(Tape<T>& t, Var x) {
  const auto& xv = t.value(x);
  Tensor<T> out = Tensor<T>::zeros(xv.shape);
  for (size_t i = 0; i < xv.data.size(); ++i) {
    const T v = xv.data[i];
    if (v >= T(0)) {
      out.data[i] = T(1) / (T(1) + std::exp(-v));
    } else {
      const T e = std::exp(v);
      out.data[i] = e / (T(1) + e);
    }
  }
  return t.make(std::move(out), t.requires_grad(x), [x](Tape<T>& tp, Var self) {
    if (!tp.requires_grad(x)) return;
    const std::vector<T>& dy = tp.grad_ref(self);
    const std::vector<T>& y = tp.value(self).data;
    std::vector<T>& dx = tp.grad_buf(x);
    for (size_t i = 0; i < dy.size(); ++i) dx[i] += dy[i] * y[i] * (T(1) - y[i]);
  });
}

template <typename T>
Var tanh_(Tape<T>& t, Var x) {
  const auto& xv = t.value(x);
  Tensor<T> out = Tensor<T>::zeros(xv.shape);
  for (size_t i = 0; i < xv.data.size(); ++i) out.data[i] = std::tanh(xv.data[i]);
  return t.make(std::move(out), t.requires_grad(x), [x](Tape<T>& tp, Var self) {
    if (!tp.requires_grad(x)) return;
    const std::vector<T>& dy = tp.grad_ref(self);
    const std::vector<T>& y = tp.value(self).data;
    std::vector<T>& dx = tp.grad_buf(x);
    for (size_t i = 0; i < dy.size(); ++i) dx[i] += dy[i] * (T(1) - y[i] * y[i]);
  });
}

// ---- softmax family ------------------------------------------------------

namespace detail {

// Iterates a 2-d tensor (rank-1 treated as one row) along `axis` as a set of
// lanes; fn(base, count, stride).
template <typename T, typename Fn>
void for_each_lane(const Tensor<T>& x, int axis, Fn&& fn) {
  int rows = 1, cols = static_cast<int>(x.numel());
  if (x.rank() == 2) {
    rows = x.dim(0);
    cols = x.dim(1);
  } else if (x.rank() != 1) {
    throw ShapeError("softmax: expected rank 1 or 2, got " + shape_str(x.shape));
  }
  if (axis < 0 || axis >= std::max(2, x.rank()))
    throw ShapeError("softmax: axis " + std::to_string(axis) + " out of range for " + shape_str(x.shape));
  if (x.rank() == 1) axis = 1;  // single row
  if (axis == 1) {
    for (int i = 0; i < rows; ++i) fn(static_cast<size_t>(i) * cols, cols, 1);
  } else {
    for (int j = 0; j < cols; ++j) fn(static_cast<size_t>(j), rows, cols);
  }
}

}  // namespace detail

// Max-subtracted softmax along `axis`; outputs are positive and sum to 1 per
// lane.
template <typename T>
Var softmax_axis(Tape<T>& t, Var x, int axis) {
  const auto& xv = t.value(x);
  Tensor<T> out = Tensor<T>::zeros(xv.shape);
  detail::for_each_lane(xv, axis, [&](size_t base, int count, int stride) {
    T mx = xv.data[base];
    for (int i = 1; i < count; ++i) mx = std::max(mx, xv.data[base + static_cast<size_t>(i) * stride]);
    T s = 0;
    for (int i = 0; i < count; ++i) {
      const T e = std::exp(xv.data[base + static_cast<size_t>(i) * stride] - mx);
      out.data[base + static_cast<size_t>(i) * stride] = e;
      s += e;
    }
    const T inv = T(1) / s;
    for (int i = 0; i < count; ++i) out.data[base + static_cast<size_t>(i) * stride] *= inv;
  });
  return t.make(std::move(out), t.requires_grad(x), [x, axis](Tape<T>& tp, Var self) {
    if (!tp.requires_grad(x)) return;
    const std::vector<T>& dy = tp.grad_ref(self);
    const Tensor<T>& y = tp.value(self);
    std::vector<T>& dx = tp.grad_buf(x);
    detail::for_each_lane(y, axis, [&](size_t base, int count, int stride) {
      T dot = 0;
      for (int i = 0; i < count; ++i) {
        const size_t k = base + static_cast<size_t>(i) * stride;
        dot += dy[k] * y.data[k];
      }
      for (int i = 0; i < count; ++i) {
        const size_t k = base + static_cast<size_t>(i) * stride;
        dx[k] += y.data[k] * (dy[k] - dot);
      }
    });
  });
}

template <typename T>
Var log_softmax_axis(Tape<T>& t, Var x, int axis) {
  const auto& xv = t.value(x);
  Tensor<T> out = Tensor<T>::zeros(xv.shape);
  detail::for_each_lane(xv, axis, [&](size_t base, int count, int stride) {
    T mx = xv.data[base];
    for (int i = 1; i < count; ++i) mx = std::max(mx, xv.data[base + static_cast<size_t>(i) * stride]);
    T s = 0;
    for (int i = 0; i < count; ++i) s += std::exp(xv.data[base + static_cast<size_t>(i) * stride] - mx);
    const T lse = mx + std::log(s);
    for (int i = 0; i < count; ++i) {
      const size_t k = base + static_cast<size_t>(i) * stride;
      out.data[k] = xv.data[k] - lse;
    }
  });
  return t.make(std::move(out), t.requires_grad(x), [x, axis](Tape<T>& tp, Var self) {
    if (!tp.requires_grad(x)) return;
    const std::vector<T>& dy = tp.grad_ref(self);
    const Tensor<T>& y = tp.value(self);
    std::vector<T>& dx = tp.grad_buf(x);
    detail::for_each_lane(y, axis, [&](size_t base, int count, int stride) {
      T s = 0;
      for (int i = 0; i < count; ++i) s += dy[base + static_cast<size_t>(i) * stride];
      for (int i = 0; i < count; ++i) {
        const size_t k = base + static_cast<size_t>(i) * stride;
        dx[k] += dy[k] - std::exp(y.data[k]) * s;
      }
    });
  });
}

// ---- normalization -------------------------------------------------------

// Per-row standardization over the last dimension followed by an affine map;
// gain and bias are rank-1 of length D.
template <typename T>
Var layer_norm(Tape<T>& t, Var x, Var gain, Var bias, T eps = T(1e-5)) {
  const auto& xv = t.value(x);
  detail::require_2d(xv, "layer_norm");
  const int r = xv.dim(0), d = xv.dim(1);
  if (d == 0) throw ShapeError("layer_norm: zero-width rows");
  const auto& gv = t.value(gain);
  const auto& bv = t.value(bias);
  if (gv.numel() != d || bv.numel() != d)
    throw ShapeError("layer_norm: gain/bias length must be " + std::to_string(d) + ", got " +
                     shape_str(gv.shape) + " and " + shape_str(bv.shape));
  Tensor<T> out = Tensor<T>::zeros(xv.shape);
  std::vector<T> xhat(xv.data.size());
  std::vector<T> inv_std(static_cast<size_t>(r));
  for (int i = 0; i < r; ++i) {
    const T* row = xv.data.data() + static_cast<size_t>(i) * d;
    T mu = K<T>::sum(row, d) / T(d);
    T var = 0;
    for (int j = 0; j < d; ++j) {
      const T c = row[j] - mu;
      var += c * c;
    }
    var /= T(d);
    const T inv = T(1) / std::sqrt(var + eps);
    inv_std[static_cast<size_t>(i)] = inv;
    for (int j = 0; j < d; ++j) {
      const T xh = (row[j] - mu) * inv;
      xhat[static_cast<size_t>(i) * d + j] = xh;
      out.data[static_cast<size_t>(i) * d + j] = gv.data[j] * xh + bv.data[j];
    }
  }
  const bool rg = t.requires_grad(x) || t.requires_grad(gain) || t.requires_grad(bias);
  return t.make(std::move(out), rg,
                [x, gain, bias, r, d, xhat = std::move(xhat), inv_std = std::move(inv_std)](Tape<T>& tp, Var self) {
    const std::vector<T>& dy = tp.grad_ref(self);
    const std::vector<T>& g = tp.value(gain).data;
    if (tp.requires_grad(gain)) {
      std::vector<T>& dg = tp.grad_buf(gain);
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < d; ++j) dg[j] += dy[static_cast<size_t>(i) * d + j] * xhat[static_cast<size_t>(i) * d + j];
    }
    if (tp.requires_grad(bias)) {
      std::vector<T>& db = tp.grad_buf(bias);
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < d; ++j) db[j] += dy[static_cast<size_t>(i) * d + j];
    }
    if (tp.requires_grad(x)) {
      std::vector<T>& dx = tp.grad_buf(x);
      for (int i = 0; i < r; ++i) {
        const size_t off = static_cast<size_t>(i) * d;
        T sum_dxhat = 0, sum_dxhat_xhat = 0;
        for (int j = 0; j < d; ++j) {
          const T dxh = dy[off + j] * g[j];
          sum_dxhat += dxh;
          sum_dxhat_xhat += dxh * xhat[off + j];
        }
        const T inv = inv_std[static_cast<size_t>(i)];
        for (int j = 0; j < d; ++j) {
          const T dxh = dy[off + j] * g[j];
          dx[off + j] += inv * (dxh - sum_dxhat / T(d) - xhat[off + j] * sum_dxhat_xhat / T(d));
        }
      }
    }
  });
}

// ---- reductions ----------------------------------------------------------

template <typename T>
Var sum_all(Tape<T>& t, Var x) {
  const auto& xv = t.value(x);
  Tensor<T> out = Tensor<T>::scalar(K<T>::sum(xv.data.data(), xv.data.size()));
  return t.make(std::move(out), t.requires_grad(x), [x](Tape<T>& tp, Var self) {
    if (!tp.requires_grad(x)) return;
    const T dy = tp.grad_ref(self)[0];
    std::vector<T>& dx = tp.grad_buf(x);
    for (T& v : dx) v += dy;
  });
}

template <typename T>
Var mean_all(Tape<T>& t, Var x) {
  const auto& xv = t.value(x);
  const T n = T(xv.numel());
  Tensor<T> out = Tensor<T>::scalar(K<T>::sum(xv.data.data(), xv.data.size()) / n);
  return t.make(std::move(out), t.requires_grad(x), [x, n](Tape<T>& tp, Var self) {
    if (!tp.requires_grad(x)) return;
    const T dy = tp.grad_ref(self)[0] / n;
    std::vector<T>& dx = tp.grad_buf(x);
    for (T& v : dx) v += dy;
  });
}

// [r x d] -> [1 x d] column sums.
template <typename T>
Var sum_axis0(Tape<T>& t, Var x) {
  const auto& xv = t.value(x);
  detail::require_2d(xv, "sum_axis0");
  const int r = xv.dim(0), d = xv.dim(1);
  Tensor<T> out = Tensor<T>::zeros({1, d});
  for (int i = 0; i < r; ++i)
    K<T>::add(xv.data.data() + static_cast<size_t>(i) * d, out.data.data(), out.data.data(), d);
  return t.make(std::move(out), t.requires_grad(x), [x, r, d](Tape<T>& tp, Var self) {
    if (!tp.requires_grad(x)) return;
    const std::vector<T>& dy = tp.grad_ref(self);
    std::vector<T>& dx = tp.grad_buf(x);
    for (int i = 0; i < r; ++i) K<T>::add(dy.data(), dx.data() + static_cast<size_t>(i) * d, dx.data() + static_cast<size_t>(i) * d, d);
  });
}

// ---- convolution ---------------------------------------------------------

namespace detail {

// x is (h*w) x cin row-major by pixel; column layout (ky, kx, cin).
template <typename T>
void im2col(const T* x, T* col, int h, int w, int cin, int ksize) {
  const int pad = ksize / 2;
  const int patch = ksize * ksize * cin;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      T* dst = col + (static_cast<size_t>(r) * w + c) * patch;
      for (int ky = 0; ky < ksize; ++ky) {
        const int sr = r + ky - pad;
        for (int kx = 0; kx < ksize; ++kx) {
          const int sc = c + kx - pad;
          T* cell = dst + (static_cast<size_t>(ky) * ksize + kx) * cin;
          if (sr < 0 || sr >= h || sc < 0 || sc >= w) {
            std::memset(cell, 0, sizeof(T) * static_cast<size_t>(cin));
          } else {
            std::memcpy(cell, x + (static_cast<size_t>(sr) * w + sc) * cin, sizeof(T) * static_cast<size_t>(cin));
          }
        }
      }
    }
  }
}

template <typename T>
void col2im_acc(const T* dcol, T* dx, int h, int w, int cin, int ksize) {
  const int pad = ksize / 2;
  const int patch = ksize * ksize * cin;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const T* src = dcol + (static_cast<size_t>(r) * w + c) * patch;
      for (int ky = 0; ky < ksize; ++ky) {
        const int sr = r + ky - pad;
        if (sr < 0 || sr >= h) continue;
        for (int kx = 0; kx < ksize; ++kx) {
          const int sc = c + kx - pad;
          if (sc < 0 || sc >= w) continue;
          const T* cell = src + (static_cast<size_t>(ky) * ksize + kx) * cin;
          T* dst = dx + (static_cast<size_t>(sr) * w + sc) * cin;
          for (int ci = 0; ci < cin; ++ci) dst[ci] += cell[ci];
        }
      }
    }
  }
}

}  // namespace detail

// Same-padding stride-1 convolution on a flattened (h*w) x cin grid.
// Weights are (ksize*ksize*cin) x cout, bias 1 x cout. The im2col buffer is
// recomputed during backward instead of being stored on the tape.
template <typename T>
Var conv2d(Tape<T>& t, Var x, Var w, Var b, int h, int wdt, int ksize) {
  const auto& xv = t.value(x);
  const auto& wv = t.value(w);
  const auto& bv = t.value(b);
  detail::require_2d(xv, "conv2d");
  detail::require_2d(wv, "conv2d");
  if (xv.dim(0) != h * wdt)
    throw ShapeError("conv2d: input rows " + std::to_string(xv.dim(0)) + " do not match grid " +
                     std::to_string(h) + "x" + std::to_string(wdt));
  const int cin = xv.dim(1);
  const int patch = ksize * ksize * cin;
  if (wv.dim(0) != patch)
    throw ShapeError("conv2d: weight rows " + std::to_string(wv.dim(0)) + " do not match patch size " +
                     std::to_string(patch));
  const int cout = wv.dim(1);
  if (bv.numel() != cout) throw ShapeError("conv2d: bias length must equal output channels");
  const int n = h * wdt;

  std::vector<T> col(static_cast<size_t>(n) * patch);
  detail::im2col(xv.data.data(), col.data(), h, wdt, cin, ksize);
  Tensor<T> out = Tensor<T>::zeros({n, cout});
  K<T>::gemm(col.data(), wv.data.data(), out.data.data(), n, patch, cout, false);
  for (int i = 0; i < n; ++i)
    K<T>::add(out.data.data() + static_cast<size_t>(i) * cout, bv.data.data(), out.data.data() + static_cast<size_t>(i) * cout, cout);

  const bool rg = t.requires_grad(x) || t.requires_grad(w) || t.requires_grad(b);
  return t.make(std::move(out), rg, [x, w, b, h, wdt, ksize, cin, cout, n, patch](Tape<T>& tp, Var self) {
    const std::vector<T>& dy = tp.grad_ref(self);
    if (tp.requires_grad(b)) {
      std::vector<T>& db = tp.grad_buf(b);
      for (int i = 0; i < n; ++i) K<T>::add(dy.data() + static_cast<size_t>(i) * cout, db.data(), db.data(), cout);
    }
    if (tp.requires_grad(w)) {
      std::vector<T> col(static_cast<size_t>(n) * patch);
      detail::im2col(tp.value(x).data.data(), col.data(), h, wdt, cin, ksize);
      std::vector<T> colT(col.size());
      detail::transpose_buf(col.data(), colT.data(), n, patch);
      K<T>::gemm(colT.data(), dy.data(), tp.grad_buf(w).data(), patch, n, cout, true);
    }
    if (tp.requires_grad(x)) {
      std::vector<T> wt(static_cast<size_t>(patch) * cout);
      detail::transpose_buf(tp.value(w).data.data(), wt.data(), patch, cout);
      std::vector<T> dcol(static_cast<size_t>(n) * patch);
      K<T>::gemm(dy.data(), wt.data(), dcol.data(), n, cout, patch, false);
      detail::col2im_acc(dcol.data(), tp.grad_buf(x).data(), h, wdt, cin, ksize);
    }
  });
}

// Escape hatch for custom nodes (used by tests to install deliberately wrong
// backward rules).
template <typename T>
Var custom(Tape<T>& t, Tensor<T> value, bool requires_grad, typename Tape<T>::BackFn back) {
  return t.make(std::move(value), requires_grad, std::move(back));
}

}  // namespace slottta::ops
