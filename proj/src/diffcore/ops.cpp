// Copyright (c) 2026 The sswp-prosody Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sswp/diffcore/ops.h"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sswp/common/error.h"

namespace sswp::diff {

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using Map = Eigen::Map<RowMat<T>>;
template <typename T>
using CMap = Eigen::Map<const RowMat<T>>;
template <typename T>
using StridedMap = Eigen::Map<RowMat<T>, 0, Eigen::OuterStride<>>;
template <typename T>
using CStridedMap = Eigen::Map<const RowMat<T>, 0, Eigen::OuterStride<>>;

template <typename T>
Map<T> as_mat(Tensor<T>& t) {
  return Map<T>(t.data().data(), t.rows(), t.cols());
}
template <typename T>
CMap<T> as_mat(const Tensor<T>& t) {
  return CMap<T>(t.data().data(), t.rows(), t.cols());
}

[[noreturn]] void shape_fail(const char* op, const std::string& detail) {
  throw ShapeError(std::string(op) + ": " + detail);
}

template <typename T>
Graph<T>& graph_of(const char* op, Expr<T> a) {
  if (a.graph == nullptr) shape_fail(op, "operand is not attached to a graph");
  return *a.graph;
}

template <typename T>
Graph<T>& graph_of(const char* op, Expr<T> a, Expr<T> b) {
  if (a.graph == nullptr || a.graph != b.graph) {
    shape_fail(op, "operands belong to different graphs");
  }
  return *a.graph;
}

template <typename T>
std::string shp(const Tensor<T>& t) {
  return t.shape_string();
}

// Visits the lines of a rows x cols matrix along `axis`: axis 1 walks rows,
// axis 0 walks columns. Both use the same per-line arithmetic so that a
// column of M and the matching row of M^T produce bit-identical results.
template <typename F>
void for_lines(int rows, int cols, int axis, F&& f) {
  if (axis == 1) {
    for (int r = 0; r < rows; ++r) f(static_cast<std::size_t>(r) * cols, std::size_t{1}, cols);
  } else {
    for (int c = 0; c < cols; ++c) f(static_cast<std::size_t>(c), static_cast<std::size_t>(cols), rows);
  }
}

void check_axis(const char* op, int axis) {
  if (axis != 0 && axis != 1) shape_fail(op, "axis must be 0 or 1, got " + std::to_string(axis));
}

struct Bcast {
  int rows, cols;
  bool a_row1, a_col1, b_row1, b_col1;
};

template <typename T>
Bcast broadcast_shape(const char* op, const Tensor<T>& a, const Tensor<T>& b) {
  auto dim = [&](int x, int y) {
    if (x == y || y == 1) return x;
    if (x == 1) return y;
    shape_fail(op, "cannot broadcast " + shp(a) + " with " + shp(b));
  };
  Bcast s{};
  s.rows = dim(a.rows(), b.rows());
  s.cols = dim(a.cols(), b.cols());
  s.a_row1 = a.rows() == 1 && s.rows != 1;
  s.a_col1 = a.cols() == 1 && s.cols != 1;
  s.b_row1 = b.rows() == 1 && s.rows != 1;
  s.b_col1 = b.cols() == 1 && s.cols != 1;
  return s;
}

template <typename T>
std::vector<int> out_dims(const Tensor<T>& a, const Tensor<T>& b, const Bcast& s) {
  if (a.rows() == s.rows && a.cols() == s.cols) return a.dims();
  if (b.rows() == s.rows && b.cols() == s.cols) return b.dims();
  return {s.rows, s.cols};
}

inline std::size_t bidx(const Bcast&, bool row1, bool col1, int ncols, int r, int c) {
  return static_cast<std::size_t>(row1 ? 0 : r) * ncols + (col1 ? 0 : c);
}

// kind: 0 add, 1 sub, 2 mul
template <typename T>
void binary_forward(int kind, const Tensor<T>& A, const Tensor<T>& B, const Bcast& s,
                    Tensor<T>& out) {
  const int ac = A.cols(), bc = B.cols();
  const bool same = !s.a_row1 && !s.a_col1 && !s.b_row1 && !s.b_col1;
  if (same) {
    auto Am = as_mat(A);
    auto Bm = as_mat(B);
    auto Om = as_mat(out);
    auto x = Am.array();
    auto y = Bm.array();
    auto o = Om.array();
    if (kind == 0) o = x + y;
    else if (kind == 1) o = x - y;
    else o = x * y;
    return;
  }
  const bool row_bias = !s.a_row1 && !s.a_col1 && s.b_row1 && !s.b_col1;
  if (row_bias) {
    auto Am = as_mat(A);
    auto Bm = as_mat(B);
    auto Om = as_mat(out);
    auto x = Am.array();
    auto y = Bm.row(0).array();
    auto o = Om.array();
    if (kind == 0) o = x.rowwise() + y;
    else if (kind == 1) o = x.rowwise() - y;
    else o = x.rowwise() * y;
    return;
  }
  for (int r = 0; r < s.rows; ++r) {
    for (int c = 0; c < s.cols; ++c) {
      const T x = A[bidx(s, s.a_row1, s.a_col1, ac, r, c)];
      const T y = B[bidx(s, s.b_row1, s.b_col1, bc, r, c)];
      T v;
      if (kind == 0) v = x + y;
      else if (kind == 1) v = x - y;
      else v = x * y;
      out[static_cast<std::size_t>(r) * s.cols + c] = v;
    }
  }
}

template <typename T>
void binary_backward(int kind, const Tensor<T>& d, const Tensor<T>& Av, const Tensor<T>& Bv,
                     const Bcast& s, Tensor<T>* da, Tensor<T>* db) {
  const int ac = Av.cols(), bc = Bv.cols();
  const bool same = !s.a_row1 && !s.a_col1 && !s.b_row1 && !s.b_col1;
  const bool row_bias = !s.a_row1 && !s.a_col1 && s.b_row1 && !s.b_col1;
  if (same || row_bias) {
    auto Dm = as_mat(d);
    auto Am = as_mat(Av);
    auto Bm = as_mat(Bv);
    auto up = Dm.array();
    if (da) {
      auto Gm = as_mat(*da);
      auto ga = Gm.array();
      if (kind != 2) ga += up;
      else if (same) ga += up * Bm.array();
      else ga += up.rowwise() * Bm.row(0).array();
    }
    if (db) {
      auto Gm = as_mat(*db);
      auto gb = Gm.array();
      const T sign = kind == 1 ? T(-1) : T(1);
      if (same) {
        if (kind != 2) gb += sign * up;
        else gb += up * Am.array();
      } else {
        if (kind != 2) gb.row(0) += sign * up.colwise().sum();
        else gb.row(0) += (up * Am.array()).colwise().sum();
      }
    }
    return;
  }
  for (int r = 0; r < s.rows; ++r) {
    for (int c = 0; c < s.cols; ++c) {
      const T up = d[static_cast<std::size_t>(r) * s.cols + c];
      const std::size_t ka = bidx(s, s.a_row1, s.a_col1, ac, r, c);
      const std::size_t kb = bidx(s, s.b_row1, s.b_col1, bc, r, c);
      if (kind == 2) {
        if (da) (*da)[ka] += up * Bv[kb];
        if (db) (*db)[kb] += up * Av[ka];
      } else {
        if (da) (*da)[ka] += up;
        if (db) (*db)[kb] += kind == 0 ? up : -up;
      }
    }
  }
}

template <typename T>
Expr<T> binary(const char* op, int kind, Expr<T> a, Expr<T> b) {
  Graph<T>& g = graph_of(op, a, b);
  const Tensor<T>& A = a.value();
  const Tensor<T>& B = b.value();
  const Bcast s = broadcast_shape(op, A, B);
  Tensor<T> out(out_dims(A, B, s));
  binary_forward(kind, A, B, s, out);
  const int ia = a.id, ib = b.id;
  return g.push(op, std::move(out), {ia, ib}, [=](Graph<T>& gr, int self) {
    Tensor<T>* da = gr.needs_grad(ia) ? &gr.accum(ia) : nullptr;
    Tensor<T>* db = gr.needs_grad(ib) ? &gr.accum(ib) : nullptr;
    binary_backward(kind, gr.upstream(self), gr.value(ia), gr.value(ib), s, da, db);
  });
}

// Elementwise unary op given value and derivative-from-(x, y) functors.
template <typename T, typename F, typename D>
Expr<T> unary(const char* op, Expr<T> a, F f, D df) {
  Graph<T>& g = graph_of(op, a);
  const Tensor<T>& A = a.value();
  Tensor<T> out(A.dims());
  for (std::size_t i = 0; i < A.size(); ++i) out[i] = f(A[i]);
  const int ia = a.id;
  return g.push(op, std::move(out), {ia}, [=](Graph<T>& gr, int self) {
    const Tensor<T>& d = gr.upstream(self);
    const Tensor<T>& x = gr.value(ia);
    const Tensor<T>& y = gr.value(self);
    Tensor<T>& dx = gr.accum(ia);
    for (std::size_t i = 0; i < d.size(); ++i) dx[i] += d[i] * df(x[i], y[i]);
  });
}

template <typename T>
using Arr = Eigen::Array<T, Eigen::Dynamic, 1>;

template <typename T>
Eigen::Map<const Arr<T>> as_arr(const Tensor<T>& t) {
  return Eigen::Map<const Arr<T>>(t.data().data(), static_cast<Eigen::Index>(t.size()));
}
template <typename T>
Eigen::Map<Arr<T>> as_arr(Tensor<T>& t) {
  return Eigen::Map<Arr<T>>(t.data().data(), static_cast<Eigen::Index>(t.size()));
}

// Vectorized elementwise op. f maps the input array to the output array;
// df maps (x, y, upstream) to the input gradient.
template <typename T, typename F, typename D>
Expr<T> unary_vec(const char* op, Expr<T> a, F f, D df) {
  Graph<T>& g = graph_of(op, a);
  const Tensor<T>& A = a.value();
  Tensor<T> out(A.dims());
  as_arr(out) = f(as_arr(A));
  const int ia = a.id;
  return g.push(op, std::move(out), {ia}, [=](Graph<T>& gr, int self) {
    const Tensor<T>& d = gr.upstream(self);
    as_arr(gr.accum(ia)) += df(as_arr(gr.value(ia)), as_arr(gr.value(self)), as_arr(d));
  });
}

}  // namespace

template <typename T>
Expr<T> matmul(Expr<T> a, Expr<T> b) {
  Graph<T>& g = graph_of("matmul", a, b);
  const Tensor<T>& A = a.value();
  const Tensor<T>& B = b.value();
  if (A.cols() != B.rows()) {
    shape_fail("matmul", "inner dimensions differ: " + shp(A) + " * " + shp(B));
  }
  Tensor<T> out = Tensor<T>::matrix(A.rows(), B.cols());
  as_mat(out).noalias() = as_mat(A) * as_mat(B);
  const int ia = a.id, ib = b.id;
  return g.push("matmul", std::move(out), {ia, ib}, [ia, ib](Graph<T>& gr, int self) {
    const Tensor<T>& d = gr.upstream(self);
    if (gr.needs_grad(ia)) {
      as_mat(gr.accum(ia)).noalias() += as_mat(d) * as_mat(gr.value(ib)).transpose();
    }
    if (gr.needs_grad(ib)) {
      as_mat(gr.accum(ib)).noalias() += as_mat(gr.value(ia)).transpose() * as_mat(d);
    }
  });
}

template <typename T>
Expr<T> matmul_nt(Expr<T> a, Expr<T> b) {
  Graph<T>& g = graph_of("matmul_nt", a, b);
  const Tensor<T>& A = a.value();
  const Tensor<T>& B = b.value();
  if (A.cols() != B.cols()) {
    shape_fail("matmul_nt", "column counts differ: " + shp(A) + " vs " + shp(B));
  }
  Tensor<T> out = Tensor<T>::matrix(A.rows(), B.rows());
  as_mat(out).noalias() = as_mat(A) * as_mat(B).transpose();
  const int ia = a.id, ib = b.id;
  return g.push("matmul_nt", std::move(out), {ia, ib}, [ia, ib](Graph<T>& gr, int self) {
    const Tensor<T>& d = gr.upstream(self);
    if (gr.needs_grad(ia)) {
      as_mat(gr.accum(ia)).noalias() += as_mat(d) * as_mat(gr.value(ib));
    }
    if (gr.needs_grad(ib)) {
      as_mat(gr.accum(ib)).noalias() += as_mat(d).transpose() * as_mat(gr.value(ia));
    }
  });
}

template <typename T>
Expr<T> pairwise_dot(Expr<T> a, Expr<T> b) {
  Graph<T>& g = graph_of("pairwise_dot", a, b);
  const Tensor<T>& A = a.value();
  const Tensor<T>& B = b.value();
  if (A.cols() != B.cols()) {
    shape_fail("pairwise_dot", "column counts differ: " + shp(A) + " vs " + shp(B));
  }
  const int n = A.rows(), m = B.rows(), d = A.cols();
  Tensor<T> out = Tensor<T>::matrix(n, m);
  for (int i = 0; i < n; ++i) {
    auto x = A.row(i);
    for (int j = 0; j < m; ++j) {
      auto y = B.row(j);
      T acc = T(0);
      for (int k = 0; k < d; ++k) acc += x[k] * y[k];
      out.at(i, j) = acc;
    }
  }
  const int ia = a.id, ib = b.id;
  return g.push("pairwise_dot", std::move(out), {ia, ib}, [ia, ib](Graph<T>& gr, int self) {
    const Tensor<T>& d = gr.upstream(self);
    if (gr.needs_grad(ia)) {
      as_mat(gr.accum(ia)).noalias() += as_mat(d) * as_mat(gr.value(ib));
    }
    if (gr.needs_grad(ib)) {
      as_mat(gr.accum(ib)).noalias() += as_mat(d).transpose() * as_mat(gr.value(ia));
    }
  });
}

template <typename T>
Expr<T> transpose(Expr<T> a) {
  Graph<T>& g = graph_of("transpose", a);
  const Tensor<T>& A = a.value();
  Tensor<T> out = Tensor<T>::matrix(A.cols(), A.rows());
  as_mat(out) = as_mat(A).transpose();
  const int ia = a.id;
  return g.push("transpose", std::move(out), {ia}, [ia](Graph<T>& gr, int self) {
    as_mat(gr.accum(ia)) += as_mat(gr.upstream(self)).transpose();
  });
}

template <typename T>
Expr<T> add(Expr<T> a, Expr<T> b) {
  return binary("add", 0, a, b);
}

template <typename T>
Expr<T> sub(Expr<T> a, Expr<T> b) {
  return binary("sub", 1, a, b);
}

template <typename T>
Expr<T> mul(Expr<T> a, Expr<T> b) {
  return binary("mul", 2, a, b);
}

template <typename T>
Expr<T> scale(Expr<T> a, T s) {
  return unary("scale", a, [s](T x) { return x * s; }, [s](T, T) { return s; });
}

template <typename T>
Expr<T> exp(Expr<T> a) {
  return unary_vec(
      "exp", a, [](const auto& x) { return Arr<T>(x.exp()); },
      [](const auto&, const auto& y, const auto& d) { return Arr<T>(d * y); });
}

template <typename T>
Expr<T> log(Expr<T> a) {
  for (T v : a.value().data()) {
    if (!(v > T(0))) throw NumericError("log: non-positive input");
  }
  return unary("log", a, [](T x) { return std::log(x); }, [](T x, T) { return T(1) / x; });
}

template <typename T>
Expr<T> tanh(Expr<T> a) {
  return unary_vec(
      "tanh", a, [](const auto& x) { return Arr<T>(x.tanh()); },
      [](const auto&, const auto& y, const auto& d) { return Arr<T>(d * (T(1) - y.square())); });
}

template <typename T>
Expr<T> sigmoid(Expr<T> a) {
  return unary_vec(
      "sigmoid", a, [](const auto& x) { return Arr<T>((T(1) + (-x).exp()).inverse()); },
      [](const auto&, const auto& y, const auto& d) { return Arr<T>(d * y * (T(1) - y)); });
}

template <typename T>
Expr<T> swish(Expr<T> a) {
  return unary_vec(
      "swish", a, [](const auto& x) { return Arr<T>(x * (T(1) + (-x).exp()).inverse()); },
      [](const auto& x, const auto&, const auto& d) {
        const Arr<T> s = (T(1) + (-x).exp()).inverse();
        return Arr<T>(d * (s + x * s * (T(1) - s)));
      });
}

constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kGeluA = 0.044715;

template <typename T>
Expr<T> gelu(Expr<T> a) {
  return unary_vec(
      "gelu", a,
      [](const auto& x) {
        const Arr<T> t = (T(kGeluC) * (x + T(kGeluA) * x.cube())).tanh();
        return Arr<T>(T(0.5) * x * (T(1) + t));
      },
      [](const auto& x, const auto&, const auto& d) {
        const Arr<T> t = (T(kGeluC) * (x + T(kGeluA) * x.cube())).tanh();
        return Arr<T>(d * (T(0.5) * (T(1) + t) +
                           T(0.5) * x * (T(1) - t.square()) * T(kGeluC) * (T(1) + T(3) * T(kGeluA) * x.square())));
      });
}

template <typename T>
Expr<T> softmax(Expr<T> a, int axis) {
  check_axis("softmax", axis);
  Graph<T>& g = graph_of("softmax", a);
  const Tensor<T>& A = a.value();
  Tensor<T> out(A.dims());
  const int rows = A.rows(), cols = A.cols();
  for_lines(rows, cols, axis, [&](std::size_t base, std::size_t stride, int n) {
    T mx = -std::numeric_limits<T>::infinity();
    for (int i = 0; i < n; ++i) mx = std::max(mx, A[base + i * stride]);
    T z = T(0);
    for (int i = 0; i < n; ++i) {
      const T e = std::exp(A[base + i * stride] - mx);
      out[base + i * stride] = e;
      z += e;
    }
    for (int i = 0; i < n; ++i) out[base + i * stride] /= z;
  });
  const int ia = a.id;
  return g.push("softmax", std::move(out), {ia}, [=](Graph<T>& gr, int self) {
    const Tensor<T>& d = gr.upstream(self);
    const Tensor<T>& y = gr.value(self);
    Tensor<T>& dx = gr.accum(ia);
    for_lines(rows, cols, axis, [&](std::size_t base, std::size_t stride, int n) {
      T dot = T(0);
      for (int i = 0; i < n; ++i) dot += d[base + i * stride] * y[base + i * stride];
      for (int i = 0; i < n; ++i) {
        const std::size_t k = base + i * stride;
        dx[k] += y[k] * (d[k] - dot);
      }
    });
  });
}

template <typename T>
Expr<T> log_softmax(Expr<T> a, int axis) {
  check_axis("log_softmax", axis);
  Graph<T>& g = graph_of("log_softmax", a);
  const Tensor<T>& A = a.value();
  Tensor<T> out(A.dims());
  const int rows = A.rows(), cols = A.cols();
  for_lines(rows, cols, axis, [&](std::size_t base, std::size_t stride, int n) {
    T mx = -std::numeric_limits<T>::infinity();
    for (int i = 0; i < n; ++i) mx = std::max(mx, A[base + i * stride]);
    T z = T(0);
    for (int i = 0; i < n; ++i) z += std::exp(A[base + i * stride] - mx);
    const T lse = mx + std::log(z);
    for (int i = 0; i < n; ++i) out[base + i * stride] = A[base + i * stride] - lse;
  });
  const int ia = a.id;
  return g.push("log_softmax", std::move(out), {ia}, [=](Graph<T>& gr, int self) {
    const Tensor<T>& d = gr.upstream(self);
    const Tensor<T>& y = gr.value(self);
    Tensor<T>& dx = gr.accum(ia);
    for_lines(rows, cols, axis, [&](std::size_t base, std::size_t stride, int n) {
      T total = T(0);
      for (int i = 0; i < n; ++i) total += d[base + i * stride];
      for (int i = 0; i < n; ++i) {
        const std::size_t k = base + i * stride;
        dx[k] += d[k] - std::exp(y[k]) * total;
      }
    });
  });
}

template <typename T>
Expr<T> layer_norm(Expr<T> x, Expr<T> gamma, Expr<T> beta, T eps) {
  Graph<T>& g = graph_of("layer_norm", x, gamma);
  graph_of("layer_norm", x, beta);
  const Tensor<T>& X = x.value();
  const int rows = X.rows(), cols = X.cols();
  if (gamma.value().size() != static_cast<std::size_t>(cols) ||
      beta.value().size() != static_cast<std::size_t>(cols)) {
    shape_fail("layer_norm", "gain/bias " + shp(gamma.value()) + "/" + shp(beta.value()) +
                                 " do not match " + std::to_string(cols) + " columns");
  }
  const Tensor<T>& G = gamma.value();
  const Tensor<T>& B = beta.value();
  Tensor<T> out(X.dims());
  std::vector<T> xhat(X.size());
  std::vector<T> rstd(rows);
  for (int r = 0; r < rows; ++r) {
    auto row = X.row(r);
    T mu = T(0);
    for (T v : row) mu += v;
    mu /= cols;
    T var = T(0);
    for (T v : row) var += (v - mu) * (v - mu);
    var /= cols;
    const T rs = T(1) / std::sqrt(var + eps);
    rstd[r] = rs;
    for (int c = 0; c < cols; ++c) {
      const std::size_t k = static_cast<std::size_t>(r) * cols + c;
      xhat[k] = (row[c] - mu) * rs;
      out[k] = G[c] * xhat[k] + B[c];
    }
  }
  const int ix = x.id, ig = gamma.id, ib = beta.id;
  return g.push("layer_norm", std::move(out), {ix, ig, ib},
                [=, xhat = std::move(xhat), rstd = std::move(rstd)](Graph<T>& gr, int self) {
    const Tensor<T>& d = gr.upstream(self);
    const Tensor<T>& Gv = gr.value(ig);
    if (gr.needs_grad(ig) || gr.needs_grad(ib)) {
      Tensor<T>* dg = gr.needs_grad(ig) ? &gr.accum(ig) : nullptr;
      Tensor<T>* db = gr.needs_grad(ib) ? &gr.accum(ib) : nullptr;
      for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
          const std::size_t k = static_cast<std::size_t>(r) * cols + c;
          if (dg) (*dg)[c] += d[k] * xhat[k];
          if (db) (*db)[c] += d[k];
        }
      }
    }
    if (!gr.needs_grad(ix)) return;
    Tensor<T>& dx = gr.accum(ix);
    for (int r = 0; r < rows; ++r) {
      T m1 = T(0), m2 = T(0);
      for (int c = 0; c < cols; ++c) {
        const std::size_t k = static_cast<std::size_t>(r) * cols + c;
        const T dxh = d[k] * Gv[c];
        m1 += dxh;
        m2 += dxh * xhat[k];
      }
      m1 /= cols;
      m2 /= cols;
      for (int c = 0; c < cols; ++c) {
        const std::size_t k = static_cast<std::size_t>(r) * cols + c;
        dx[k] += rstd[r] * (d[k] * Gv[c] - m1 - xhat[k] * m2);
      }
    }
  });
}

template <typename T>
Expr<T> embedding(Expr<T> table, std::span<const int> ids) {
  Graph<T>& g = graph_of("embedding", table);
  const Tensor<T>& W = table.value();
  const int n = static_cast<int>(ids.size()), d = W.cols();
  if (n == 0) shape_fail("embedding", "empty index list");
  for (int id : ids) {
    if (id < -1 || id >= W.rows()) {
      shape_fail("embedding", "index " + std::to_string(id) + " outside table of " +
                                  std::to_string(W.rows()) + " rows");
    }
  }
  Tensor<T> out = Tensor<T>::matrix(n, d);
  for (int i = 0; i < n; ++i) {
    if (ids[i] < 0) continue;
    std::copy(W.row(ids[i]).begin(), W.row(ids[i]).end(), out.row(i).begin());
  }
  std::vector<int> idx(ids.begin(), ids.end());
  const int it = table.id;
  return g.push("embedding", std::move(out), {it},
                [=, idx = std::move(idx)](Graph<T>& gr, int self) {
    const Tensor<T>& dout = gr.upstream(self);
    Tensor<T>& dw = gr.accum(it);
    for (int i = 0; i < n; ++i) {
      if (idx[i] < 0) continue;
      auto src = dout.row(i);
      auto dst = dw.row(idx[i]);
      for (int c = 0; c < d; ++c) dst[c] += src[c];
    }
  });
}

template <typename T>
Expr<T> concat(const std::vector<Expr<T>>& xs, int axis) {
  check_axis("concat", axis);
  if (xs.empty()) shape_fail("concat", "no operands");
  Graph<T>& g = graph_of("concat", xs.front());
  std::vector<int> ids;
  std::vector<int> offsets;
  int total = 0;
  const int fixed = axis == 0 ? xs.front().cols() : xs.front().rows();
  for (const auto& x : xs) {
    graph_of("concat", xs.front(), x);
    const int other = axis == 0 ? x.cols() : x.rows();
    if (other != fixed) {
      shape_fail("concat", "operand " + shp(x.value()) + " does not align on axis " +
                               std::to_string(axis) + " (expected " + std::to_string(fixed) + ")");
    }
    ids.push_back(x.id);
    offsets.push_back(total);
    total += axis == 0 ? x.rows() : x.cols();
  }
  const int rows = axis == 0 ? total : fixed;
  const int cols = axis == 0 ? fixed : total;
  Tensor<T> out = Tensor<T>::matrix(rows, cols);
  for (std::size_t p = 0; p < xs.size(); ++p) {
    const Tensor<T>& X = xs[p].value();
    for (int r = 0; r < X.rows(); ++r) {
      for (int c = 0; c < X.cols(); ++c) {
        if (axis == 0) out.at(offsets[p] + r, c) = X.at(r, c);
        else out.at(r, offsets[p] + c) = X.at(r, c);
      }
    }
  }
  return g.push("concat", std::move(out), ids, [=](Graph<T>& gr, int self) {
    const Tensor<T>& d = gr.upstream(self);
    for (std::size_t p = 0; p < ids.size(); ++p) {
      if (!gr.needs_grad(ids[p])) continue;
      Tensor<T>& dx = gr.accum(ids[p]);
      for (int r = 0; r < dx.rows(); ++r) {
        for (int c = 0; c < dx.cols(); ++c) {
          dx.at(r, c) += axis == 0 ? d.at(offsets[p] + r, c) : d.at(r, offsets[p] + c);
        }
      }
    }
  });
}

template <typename T>
Expr<T> slice_rows(Expr<T> a, int begin, int end) {
  Graph<T>& g = graph_of("slice_rows", a);
  const Tensor<T>& A = a.value();
  if (begin < 0 || end > A.rows() || begin >= end) {
    shape_fail("slice_rows", "range [" + std::to_string(begin) + "," + std::to_string(end) +
                                 ") invalid for " + shp(A));
  }
  const int cols = A.cols();
  Tensor<T> out = Tensor<T>::matrix(end - begin, cols);
  std::copy(A.data().begin() + static_cast<std::size_t>(begin) * cols,
            A.data().begin() + static_cast<std::size_t>(end) * cols, out.data().begin());
  const int ia = a.id;
  return g.push("slice_rows", std::move(out), {ia}, [=](Graph<T>& gr, int self) {
    const Tensor<T>& d = gr.upstream(self);
    Tensor<T>& dx = gr.accum(ia);
    const std::size_t off = static_cast<std::size_t>(begin) * cols;
    for (std::size_t i = 0; i < d.size(); ++i) dx[off + i] += d[i];
  });
}

template <typename T>
Expr<T> slice_cols(Expr<T> a, int begin, int end) {
  Graph<T>& g = graph_of("slice_cols", a);
  const Tensor<T>& A = a.value();
  if (begin < 0 || end > A.cols() || begin >= end) {
    shape_fail("slice_cols", "range [" + std::to_string(begin) + "," + std::to_string(end) +
                                 ") invalid for " + shp(A));
  }
  const int rows = A.rows(), w = end - begin;
  Tensor<T> out = Tensor<T>::matrix(rows, w);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < w; ++c) out.at(r, c) = A.at(r, begin + c);
  }
  const int ia = a.id;
  return g.push("slice_cols", std::move(out), {ia}, [=](Graph<T>& gr, int self) {
    const Tensor<T>& d = gr.upstream(self);
    Tensor<T>& dx = gr.accum(ia);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < w; ++c) dx.at(r, begin + c) += d.at(r, c);
    }
  });
}

template <typename T>
Expr<T> reshape(Expr<T> a, std::vector<int> dims) {
  Graph<T>& g = graph_of("reshape", a);
  const Tensor<T>& A = a.value();
  Tensor<T> out(std::move(dims), A.storage());
  const int ia = a.id;
  return g.push("reshape", std::move(out), {ia}, [ia](Graph<T>& gr, int self) {
    const Tensor<T>& d = gr.upstream(self);
    Tensor<T>& dx = gr.accum(ia);
    for (std::size_t i = 0; i < d.size(); ++i) dx[i] += d[i];
  });
}

template <typename T>
Expr<T> masked_fill(Expr<T> a, std::span<const std::uint8_t> mask, T value) {
  Graph<T>& g = graph_of("masked_fill", a);
  const Tensor<T>& A = a.value();
  if (mask.size() != A.size()) {
    shape_fail("masked_fill", "mask has " + std::to_string(mask.size()) + " entries, input " +
                                  shp(A));
  }
  Tensor<T> out = A;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) out[i] = value;
  }
  std::vector<std::uint8_t> m(mask.begin(), mask.end());
  const int ia = a.id;
  return g.push("masked_fill", std::move(out), {ia},
                [ia, m = std::move(m)](Graph<T>& gr, int self) {
    const Tensor<T>& d = gr.upstream(self);
    Tensor<T>& dx = gr.accum(ia);
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (!m[i]) dx[i] += d[i];
    }
  });
}

template <typename T>
Expr<T> sum(Expr<T> a, int axis) {
  check_axis("sum", axis);
  Graph<T>& g = graph_of("sum", a);
  const Tensor<T>& A = a.value();
  const int rows = A.rows(), cols = A.cols();
  Tensor<T> out = axis == 1 ? Tensor<T>::matrix(rows, 1) : Tensor<T>::matrix(1, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) out[axis == 1 ? r : c] += A.at(r, c);
  }
  const int ia = a.id;
  return g.push("sum", std::move(out), {ia}, [=](Graph<T>& gr, int self) {
    const Tensor<T>& d = gr.upstream(self);
    Tensor<T>& dx = gr.accum(ia);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) dx.at(r, c) += d[axis == 1 ? r : c];
    }
  });
}

template <typename T>
Expr<T> mean(Expr<T> a, int axis) {
  check_axis("mean", axis);
  const int n = axis == 1 ? a.cols() : a.rows();
  return scale(sum(a, axis), T(1) / static_cast<T>(n));
}

template <typename T>
Expr<T> sum_all(Expr<T> a) {
  Graph<T>& g = graph_of("sum_all", a);
  T acc = T(0);
  for (T v : a.value().data()) acc += v;
  const int ia = a.id;
  return g.push("sum_all", Tensor<T>::scalar(acc), {ia}, [ia](Graph<T>& gr, int self) {
    const T d = gr.upstream(self)[0];
    for (auto& v : gr.accum(ia).data()) v += d;
  });
}

template <typename T>
Expr<T> mean_all(Expr<T> a) {
  return scale(sum_all(a), T(1) / static_cast<T>(a.value().size()));
}

template <typename T>
Expr<T> depthwise_conv1d(Expr<T> x, Expr<T> weights, int segment_len) {
  Graph<T>& g = graph_of("depthwise_conv1d", x, weights);
  const Tensor<T>& X = x.value();
  const Tensor<T>& W = weights.value();
  const int rows = X.rows(), ch = X.cols(), k = W.rows();
  if (W.cols() != ch) {
    shape_fail("depthwise_conv1d", "kernel " + shp(W) + " does not match " +
                                       std::to_string(ch) + " channels");
  }
  if (k % 2 == 0) shape_fail("depthwise_conv1d", "kernel length must be odd, got " + std::to_string(k));
  if (segment_len < 1 || rows % segment_len != 0) {
    shape_fail("depthwise_conv1d", std::to_string(rows) + " rows do not split into segments of " +
                                       std::to_string(segment_len));
  }
  const int pad = k / 2;
  Tensor<T> out = Tensor<T>::matrix(rows, ch);
  for (int r = 0; r < rows; ++r) {
    const int seg0 = (r / segment_len) * segment_len;
    const int t = r - seg0;
    for (int j = 0; j < k; ++j) {
      const int src = t + j - pad;
      if (src < 0 || src >= segment_len) continue;
      auto xr = X.row(seg0 + src);
      auto wr = W.row(j);
      auto o = out.row(r);
      for (int c = 0; c < ch; ++c) o[c] += wr[c] * xr[c];
    }
  }
  const int ix = x.id, iw = weights.id;
  return g.push("depthwise_conv1d", std::move(out), {ix, iw}, [=](Graph<T>& gr, int self) {
    const Tensor<T>& d = gr.upstream(self);
    const Tensor<T>& Xv = gr.value(ix);
    const Tensor<T>& Wv = gr.value(iw);
    Tensor<T>* dx = gr.needs_grad(ix) ? &gr.accum(ix) : nullptr;
    Tensor<T>* dw = gr.needs_grad(iw) ? &gr.accum(iw) : nullptr;
    for (int r = 0; r < rows; ++r) {
      const int seg0 = (r / segment_len) * segment_len;
      const int t = r - seg0;
      auto dr = d.row(r);
      for (int j = 0; j < k; ++j) {
        const int src = t + j - pad;
        if (src < 0 || src >= segment_len) continue;
        if (dx) {
          auto dxr = dx->row(seg0 + src);
          auto wr = Wv.row(j);
          for (int c = 0; c < ch; ++c) dxr[c] += wr[c] * dr[c];
        }
        if (dw) {
          auto dwr = dw->row(j);
          auto xr = Xv.row(seg0 + src);
          for (int c = 0; c < ch; ++c) dwr[c] += xr[c] * dr[c];
        }
      }
    }
  });
}

template <typename T>
Expr<T> l2_normalize_rows(Expr<T> a, T eps) {
  Graph<T>& g = graph_of("l2_normalize_rows", a);
  const Tensor<T>& A = a.value();
  const int rows = A.rows(), cols = A.cols();
  Tensor<T> out(A.dims());
  std::vector<T> norms(rows);
  for (int r = 0; r < rows; ++r) {
    T ss = T(0);
    for (T v : A.row(r)) ss += v * v;
    norms[r] = std::sqrt(ss + eps);
    for (int c = 0; c < cols; ++c) out.at(r, c) = A.at(r, c) / norms[r];
  }
  const int ia = a.id;
  return g.push("l2_normalize_rows", std::move(out), {ia},
                [=, norms = std::move(norms)](Graph<T>& gr, int self) {
    const Tensor<T>& d = gr.upstream(self);
    const Tensor<T>& y = gr.value(self);
    Tensor<T>& dx = gr.accum(ia);
    for (int r = 0; r < rows; ++r) {
      T dot = T(0);
      for (int c = 0; c < cols; ++c) dot += d.at(r, c) * y.at(r, c);
      for (int c = 0; c < cols; ++c) dx.at(r, c) += (d.at(r, c) - y.at(r, c) * dot) / norms[r];
    }
  });
}

template <typename T>
Expr<T> pick(Expr<T> a, std::span<const int> index) {
  Graph<T>& g = graph_of("pick", a);
  const Tensor<T>& A = a.value();
  const int rows = A.rows();
  if (static_cast<int>(index.size()) != rows) {
    shape_fail("pick", std::to_string(index.size()) + " indices for " + shp(A));
  }
  Tensor<T> out = Tensor<T>::matrix(rows, 1);
  for (int r = 0; r < rows; ++r) {
    if (index[r] < 0 || index[r] >= A.cols()) {
      shape_fail("pick", "index " + std::to_string(index[r]) + " out of range for " + shp(A));
    }
    out[r] = A.at(r, index[r]);
  }
  std::vector<int> idx(index.begin(), index.end());
  const int ia = a.id;
  return g.push("pick", std::move(out), {ia}, [ia, idx = std::move(idx)](Graph<T>& gr, int self) {
    const Tensor<T>& d = gr.upstream(self);
    Tensor<T>& dx = gr.accum(ia);
    for (std::size_t r = 0; r < idx.size(); ++r) dx.at(static_cast<int>(r), idx[r]) += d[r];
  });
}

template <typename T>
Expr<T> segment_attention(Expr<T> q, Expr<T> k, Expr<T> v, int segment_len, int heads,
                          std::span<const int> valid_len) {
  Graph<T>& g = graph_of("segment_attention", q, k);
  graph_of("segment_attention", q, v);
  const Tensor<T>& Q = q.value();
  const Tensor<T>& K = k.value();
  const Tensor<T>& V = v.value();
  if (!Q.same_shape(K) || !Q.same_shape(V)) {
    shape_fail("segment_attention", "q/k/v shapes differ: " + shp(Q) + " " + shp(K) + " " + shp(V));
  }
  const int rows = Q.rows(), d = Q.cols();
  if (segment_len < 1 || rows % segment_len != 0) {
    shape_fail("segment_attention", std::to_string(rows) + " rows do not split into segments of " +
                                        std::to_string(segment_len));
  }
  if (heads < 1 || d % heads != 0) {
    shape_fail("segment_attention", std::to_string(d) + " columns not divisible into " +
                                        std::to_string(heads) + " heads");
  }
  const int segs = rows / segment_len;
  if (static_cast<int>(valid_len.size()) != segs) {
    shape_fail("segment_attention", std::to_string(valid_len.size()) + " lengths for " +
                                        std::to_string(segs) + " segments");
  }
  for (int len : valid_len) {
    if (len < 1 || len > segment_len) {
      shape_fail("segment_attention", "valid length " + std::to_string(len) +
                                          " outside [1," + std::to_string(segment_len) + "]");
    }
  }
  const int dh = d / heads;
  const int L = segment_len;
  const T scl = T(1) / std::sqrt(static_cast<T>(dh));
  std::vector<int> lens(valid_len.begin(), valid_len.end());
  // probs[(s * heads + h) * L * L + i * L + j]
  std::vector<T> probs(static_cast<std::size_t>(segs) * heads * L * L, T(0));
  Tensor<T> out = Tensor<T>::matrix(rows, d);
  RowMat<T> scores(L, L);
  for (int s = 0; s < segs; ++s) {
    const int n = lens[s];
    for (int h = 0; h < heads; ++h) {
      const std::size_t off = static_cast<std::size_t>(s) * L * d + h * dh;
      CStridedMap<T> qs(Q.data().data() + off, L, dh, Eigen::OuterStride<>(d));
      CStridedMap<T> ks(K.data().data() + off, n, dh, Eigen::OuterStride<>(d));
      CStridedMap<T> vs(V.data().data() + off, n, dh, Eigen::OuterStride<>(d));
      StridedMap<T> os(out.data().data() + off, L, dh, Eigen::OuterStride<>(d));
      Map<T> p(probs.data() + (static_cast<std::size_t>(s) * heads + h) * L * L, L, L);
      scores.leftCols(n).noalias() = (qs * ks.transpose()) * scl;
      for (int i = 0; i < L; ++i) {
        T mx = scores.row(i).head(n).maxCoeff();
        T z = T(0);
        for (int j = 0; j < n; ++j) {
          const T e = std::exp(scores(i, j) - mx);
          p(i, j) = e;
          z += e;
        }
        for (int j = 0; j < n; ++j) p(i, j) /= z;
      }
      os.noalias() = p.leftCols(n) * vs;
    }
  }
  const int iq = q.id, ik = k.id, iv = v.id;
  return g.push("segment_attention", std::move(out), {iq, ik, iv},
                [=, lens = std::move(lens), probs = std::move(probs)](Graph<T>& gr, int self) {
    const Tensor<T>& dO = gr.upstream(self);
    const Tensor<T>& Qv = gr.value(iq);
    const Tensor<T>& Kv = gr.value(ik);
    const Tensor<T>& Vv = gr.value(iv);
    Tensor<T>& dQ = gr.accum(iq);
    Tensor<T>& dK = gr.accum(ik);
    Tensor<T>& dV = gr.accum(iv);
    RowMat<T> dp(L, L);
    for (int s = 0; s < segs; ++s) {
      const int n = lens[s];
      for (int h = 0; h < heads; ++h) {
        const std::size_t off = static_cast<std::size_t>(s) * L * d + h * dh;
        CStridedMap<T> qs(Qv.data().data() + off, L, dh, Eigen::OuterStride<>(d));
        CStridedMap<T> ks(Kv.data().data() + off, n, dh, Eigen::OuterStride<>(d));
        CStridedMap<T> vs(Vv.data().data() + off, n, dh, Eigen::OuterStride<>(d));
        CStridedMap<T> dos(dO.data().data() + off, L, dh, Eigen::OuterStride<>(d));
        StridedMap<T> dqs(dQ.data().data() + off, L, dh, Eigen::OuterStride<>(d));
        StridedMap<T> dks(dK.data().data() + off, n, dh, Eigen::OuterStride<>(d));
        StridedMap<T> dvs(dV.data().data() + off, n, dh, Eigen::OuterStride<>(d));
        CMap<T> p(probs.data() + (static_cast<std::size_t>(s) * heads + h) * L * L, L, L);
        dvs.noalias() += p.leftCols(n).transpose() * dos;
        dp.leftCols(n).noalias() = dos * vs.transpose();
        for (int i = 0; i < L; ++i) {
          T dot = T(0);
          for (int j = 0; j < n; ++j) dot += dp(i, j) * p(i, j);
          for (int j = 0; j < n; ++j) dp(i, j) = p(i, j) * (dp(i, j) - dot) * scl;
        }
        dqs.noalias() += dp.leftCols(n) * ks;
        dks.noalias() += dp.leftCols(n).transpose() * qs;
      }
    }
  });
}

template <typename T>
Expr<T> segment_weighted_sum(Expr<T> alpha, Expr<T> h) {
  Graph<T>& g = graph_of("segment_weighted_sum", alpha, h);
  const Tensor<T>& A = alpha.value();
  const Tensor<T>& H = h.value();
  const int segs = A.rows(), L = A.cols(), d = H.cols();
  if (H.rows() != segs * L) {
    shape_fail("segment_weighted_sum", "weights " + shp(A) + " do not tile rows of " + shp(H));
  }
  Tensor<T> out = Tensor<T>::matrix(segs, d);
  for (int s = 0; s < segs; ++s) {
    auto o = out.row(s);
    for (int t = 0; t < L; ++t) {
      const T w = A.at(s, t);
      if (w == T(0)) continue;
      auto hr = H.row(s * L + t);
      for (int c = 0; c < d; ++c) o[c] += w * hr[c];
    }
  }
  const int ia = alpha.id, ih = h.id;
  return g.push("segment_weighted_sum", std::move(out), {ia, ih}, [=](Graph<T>& gr, int self) {
    const Tensor<T>& dO = gr.upstream(self);
    const Tensor<T>& Av = gr.value(ia);
    const Tensor<T>& Hv = gr.value(ih);
    Tensor<T>* da = gr.needs_grad(ia) ? &gr.accum(ia) : nullptr;
    Tensor<T>* dh = gr.needs_grad(ih) ? &gr.accum(ih) : nullptr;
    for (int s = 0; s < segs; ++s) {
      auto dor = dO.row(s);
      for (int t = 0; t < L; ++t) {
        auto hr = Hv.row(s * L + t);
        if (da) {
          T acc = T(0);
          for (int c = 0; c < d; ++c) acc += dor[c] * hr[c];
          da->at(s, t) += acc;
        }
        if (dh) {
          const T w = Av.at(s, t);
          auto dhr = dh->row(s * L + t);
          for (int c = 0; c < d; ++c) dhr[c] += w * dor[c];
        }
      }
    }
  });
}

#define SSWP_INSTANTIATE_OPS(T)                                                        \
  template Expr<T> matmul(Expr<T>, Expr<T>);                                          \
  template Expr<T> matmul_nt(Expr<T>, Expr<T>);                                       \
  template Expr<T> pairwise_dot(Expr<T>, Expr<T>);                                    \
  template Expr<T> transpose(Expr<T>);                                                \
  template Expr<T> add(Expr<T>, Expr<T>);                                             \
  template Expr<T> sub(Expr<T>, Expr<T>);                                             \
  template Expr<T> mul(Expr<T>, Expr<T>);                                             \
  template Expr<T> scale(Expr<T>, T);                                                 \
  template Expr<T> exp(Expr<T>);                                                      \
  template Expr<T> log(Expr<T>);                                                      \
  template Expr<T> tanh(Expr<T>);                                                     \
  template Expr<T> sigmoid(Expr<T>);                                                  \
  template Expr<T> swish(Expr<T>);                                                    \
  template Expr<T> gelu(Expr<T>);                                                     \
  template Expr<T> softmax(Expr<T>, int);                                             \
  template Expr<T> log_softmax(Expr<T>, int);                                         \
  template Expr<T> layer_norm(Expr<T>, Expr<T>, Expr<T>, T);                          \
  template Expr<T> embedding(Expr<T>, std::span<const int>);                          \
  template Expr<T> concat(const std::vector<Expr<T>>&, int);                          \
  template Expr<T> slice_rows(Expr<T>, int, int);                                     \
  template Expr<T> slice_cols(Expr<T>, int, int);                                     \
  template Expr<T> reshape(Expr<T>, std::vector<int>);                                \
  template Expr<T> masked_fill(Expr<T>, std::span<const std::uint8_t>, T);            \
  template Expr<T> sum(Expr<T>, int);                                                 \
  template Expr<T> mean(Expr<T>, int);                                                \
  template Expr<T> sum_all(Expr<T>);                                                  \
  template Expr<T> mean_all(Expr<T>);                                                 \
  template Expr<T> depthwise_conv1d(Expr<T>, Expr<T>, int);                           \
  template Expr<T> l2_normalize_rows(Expr<T>, T);                                     \
  template Expr<T> pick(Expr<T>, std::span<const int>);                               \
  template Expr<T> segment_attention(Expr<T>, Expr<T>, Expr<T>, int, int,             \
                                     std::span<const int>);                           \
  template Expr<T> segment_weighted_sum(Expr<T>, Expr<T>);

SSWP_INSTANTIATE_OPS(float)
SSWP_INSTANTIATE_OPS(double)

#undef SSWP_INSTANTIATE_OPS

}  // namespace sswp::diff
