// Copyright 2026 The hetembed Authors. All Rights Reserved.
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

#pragma once

// Dense float64 tensors with a reverse-mode tape.
//
// A Tape records one node per primitive. Each node keeps its forward value
// and a closure that pushes its output gradient into its inputs. Parameters
// live outside the tape; Tape::param() binds one as a leaf without copying,
// and Tape::backward() adds the leaf gradients into Parameter::grad. Calling
// backward() twice therefore accumulates twice; zero the parameters' grads
// in between to start over.
//
// Tensors are rank 0 (scalar), 1 (vector) or 2 (row-major matrix).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <functional>
#include <initializer_list>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hetembed/common.hpp"

namespace hetembed::ad {

using Shape = std::vector<std::size_t>;

inline std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
  os << ']';
  return os.str();
}

inline std::size_t numel_of(const Shape& s) {
  return std::accumulate(s.begin(), s.end(), std::size_t{1}, std::multiplies<>());
}

class NonFiniteError : public Error {
 public:
  using Error::Error;
};

class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0)
      : shape_(std::move(shape)), data_(numel_of(shape_), fill) {}
  Tensor(Shape shape, std::vector<double> values) : shape_(std::move(shape)), data_(std::move(values)) {
    if (data_.size() != numel_of(shape_))
      throw DimensionError("tensor of shape " + shape_str(shape_) + " given " +
                           std::to_string(data_.size()) + " values");
  }

  static Tensor scalar(double v) { return Tensor(Shape{}, std::vector<double>{v}); }
  static Tensor vector(std::vector<double> v) {
    const auto n = v.size();
    return Tensor(Shape{n}, std::move(v));
  }
  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> v) {
    return Tensor(Shape{rows, cols}, std::move(v));
  }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t numel() const { return data_.size(); }
  std::size_t rows() const { return shape_.size() == 2 ? shape_[0] : 1; }
  std::size_t cols() const { return shape_.empty() ? 1 : shape_.back(); }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  const std::vector<double>& raw() const { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols(), cols()}; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols(), cols()}; }

  double item() const {
    if (data_.size() != 1) throw DimensionError("item() on tensor of shape " + shape_str(shape_));
    return data_[0];
  }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
  }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
  bool frozen = false;

  Parameter() = default;
  Parameter(std::string n, Tensor v) : name(std::move(n)), value(std::move(v)), grad(value.shape()) {}

  void zero_grad() { grad = Tensor(value.shape()); }
};

class Tape;

class Var {
 public:
  Var() = default;
  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  std::size_t numel() const { return value().numel(); }
  double item() const { return value().item(); }
  Tape* tape() const { return tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* t, std::size_t id) : tape_(t), id_(id) {}
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::size_t)>;

  /// A non-recording tape still computes values but keeps no closures.
  explicit Tape(bool recording = true) : recording_(recording) {
#ifndef NDEBUG
    checked_ = true;
#endif
  }
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return recording_; }
  /// In checked mode every recorded value must be finite.
  void set_checked(bool on) { checked_ = on; }
  bool checked() const { return checked_; }
  std::size_t size() const { return nodes_.size(); }

  Var constant(Tensor t) {
    nodes_.push_back(Node{std::move(t), {}, nullptr, nullptr, nullptr});
    return Var(this, nodes_.size() - 1);
  }

  /// Binds a parameter as a leaf. The value is referenced, not copied.
  Var param(Parameter& p) {
    nodes_.push_back(Node{{}, {}, nullptr, &p.value, recording_ && !p.frozen ? &p : nullptr});
    return Var(this, nodes_.size() - 1);
  }

  /// Appends a primitive's output. `fn` receives the tape and this node's id;
  /// it reads grad(id) and adds into its inputs' grads.
  Var record(Tensor value, BackwardFn fn) {
    if (checked_ && !value.all_finite())
      throw NonFiniteError("non-finite value produced at tape node " + std::to_string(nodes_.size()));
    nodes_.push_back(Node{std::move(value), {}, recording_ ? std::move(fn) : nullptr, nullptr, nullptr});
    return Var(this, nodes_.size() - 1);
  }

  const Tensor& value(std::size_t id) const {
    const auto& n = nodes_[id];
    return n.ref ? *n.ref : n.value;
  }

  /// Gradient slot of a node, allocated on first use.
  Tensor& grad(std::size_t id) {
    auto& n = nodes_[id];
    if (n.grad.numel() != value(id).numel() || n.grad.shape() != value(id).shape())
      n.grad = Tensor(value(id).shape());
    return n.grad;
  }
  bool has_grad(std::size_t id) const { return nodes_[id].grad.numel() > 0 || value(id).numel() == 0; }

  /// Runs reverse accumulation from a scalar and adds leaf gradients into
  /// the bound parameters.
  void backward(const Var& loss) {
    if (loss.tape() != this) throw Error("backward: loss belongs to a different tape");
    if (!recording_) throw Error("backward: tape is not recording");
    if (loss.numel() != 1)
      throw DimensionError("backward needs a scalar loss, got shape " + shape_str(loss.shape()));
    for (auto& n : nodes_) n.grad = Tensor();
    grad(loss.id())[0] = 1.0;
    for (std::size_t i = loss.id() + 1; i-- > 0;) {
      auto& n = nodes_[i];
      if (n.grad.numel() == 0) continue;
      if (n.backward) n.backward(*this, i);
      if (n.param != nullptr) {
        auto& g = n.param->grad;
        if (g.shape() != n.param->value.shape()) g = Tensor(n.param->value.shape());
        for (std::size_t k = 0; k < g.numel(); ++k) g[k] += n.grad[k];
      }
    }
  }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    BackwardFn backward;
    const Tensor* ref;
    Parameter* param;
  };
  std::deque<Node> nodes_;
  bool recording_;
  bool checked_ = false;
};

inline const Tensor& Var::value() const { return tape_->value(id_); }

namespace detail {

inline Tape& same_tape(const Var& a, const Var& b) {
  if (a.tape() != b.tape() || a.tape() == nullptr) throw Error("operands live on different tapes");
  return *a.tape();
}

inline void require_same_shape(const char* op, const Var& a, const Var& b) {
  if (a.shape() != b.shape())
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
}

inline void require_rank(const char* op, const Var& a, std::size_t rank) {
  if (a.value().rank() != rank)
    throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got shape " +
                         shape_str(a.shape()));
}

template <typename F, typename DF>
Var unary(const Var& a, F f, DF df) {
  Tape& t = *a.tape();
  const auto& x = a.value();
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.numel(); ++i) y[i] = f(x[i]);
  const auto ia = a.id();
  return t.record(std::move(y), [ia, df](Tape& tp, std::size_t self) {
    const auto& x = tp.value(ia);
    const auto& y = tp.value(self);
    const auto& gy = tp.grad(self);
    auto& gx = tp.grad(ia);
    for (std::size_t i = 0; i < gx.numel(); ++i) gx[i] += gy[i] * df(x[i], y[i]);
  });
}

}  // namespace detail

inline Var add(const Var& a, const Var& b) {
  Tape& t = detail::same_tape(a, b);
  detail::require_same_shape("add", a, b);
  Tensor y = a.value();
  const auto& bv = b.value();
  for (std::size_t i = 0; i < y.numel(); ++i) y[i] += bv[i];
  const auto ia = a.id(), ib = b.id();
  return t.record(std::move(y), [ia, ib](Tape& tp, std::size_t self) {
    const Tensor gy = tp.grad(self);
    auto& ga = tp.grad(ia);
    for (std::size_t i = 0; i < ga.numel(); ++i) ga[i] += gy[i];
    auto& gb = tp.grad(ib);
    for (std::size_t i = 0; i < gb.numel(); ++i) gb[i] += gy[i];
  });
}

inline Var sub(const Var& a, const Var& b) {
  Tape& t = detail::same_tape(a, b);
  detail::require_same_shape("sub", a, b);
  Tensor y = a.value();
  const auto& bv = b.value();
  for (std::size_t i = 0; i < y.numel(); ++i) y[i] -= bv[i];
  const auto ia = a.id(), ib = b.id();
  return t.record(std::move(y), [ia, ib](Tape& tp, std::size_t self) {
    const Tensor gy = tp.grad(self);
    auto& ga = tp.grad(ia);
    for (std::size_t i = 0; i < ga.numel(); ++i) ga[i] += gy[i];
    auto& gb = tp.grad(ib);
    for (std::size_t i = 0; i < gb.numel(); ++i) gb[i] -= gy[i];
  });
}

/// Elementwise product.
inline Var mul(const Var& a, const Var& b) {
  Tape& t = detail::same_tape(a, b);
  detail::require_same_shape("mul", a, b);
  Tensor y = a.value();
  const auto& bv = b.value();
  for (std::size_t i = 0; i < y.numel(); ++i) y[i] *= bv[i];
  const auto ia = a.id(), ib = b.id();
  return t.record(std::move(y), [ia, ib](Tape& tp, std::size_t self) {
    const Tensor gy = tp.grad(self);
    const auto& av = tp.value(ia);
    const auto& bv = tp.value(ib);
    {
      auto& ga = tp.grad(ia);
      for (std::size_t i = 0; i < ga.numel(); ++i) ga[i] += gy[i] * bv[i];
    }
    auto& gb = tp.grad(ib);
    for (std::size_t i = 0; i < gb.numel(); ++i) gb[i] += gy[i] * av[i];
  });
}

inline Var scale(const Var& a, double s) {
  return detail::unary(
      a, [s](double x) { return s * x; }, [s](double, double) { return s; });
}

inline Var neg(const Var& a) { return scale(a, -1.0); }

/// Scalar variable times tensor.
inline Var mul_scalar(const Var& s, const Var& a) {
  Tape& t = detail::same_tape(s, a);
  if (s.numel() != 1) throw DimensionError("mul_scalar: first operand must be scalar, got " + shape_str(s.shape()));
  const double k = s.item();
  Tensor y = a.value();
  for (auto& v : y.values()) v *= k;
  const auto is = s.id(), ia = a.id();
  return t.record(std::move(y), [is, ia](Tape& tp, std::size_t self) {
    const Tensor gy = tp.grad(self);
    const auto& av = tp.value(ia);
    const double k = tp.value(is)[0];
    double gs = 0.0;
    for (std::size_t i = 0; i < gy.numel(); ++i) gs += gy[i] * av[i];
    tp.grad(is)[0] += gs;
    auto& ga = tp.grad(ia);
    for (std::size_t i = 0; i < ga.numel(); ++i) ga[i] += gy[i] * k;
  });
}

/// Tensor plus a scalar variable broadcast over every entry.
inline Var add_scalar(const Var& a, const Var& s) {
  Tape& t = detail::same_tape(a, s);
  if (s.numel() != 1) throw DimensionError("add_scalar: second operand must be scalar, got " + shape_str(s.shape()));
  const double k = s.item();
  Tensor y = a.value();
  for (auto& v : y.values()) v += k;
  const auto ia = a.id(), is = s.id();
  return t.record(std::move(y), [ia, is](Tape& tp, std::size_t self) {
    const Tensor gy = tp.grad(self);
    double gs = 0.0;
    auto& ga = tp.grad(ia);
    for (std::size_t i = 0; i < gy.numel(); ++i) {
      ga[i] += gy[i];
      gs += gy[i];
    }
    tp.grad(is)[0] += gs;
  });
}

/// M{r,c} * v{c} -> {r}
inline Var matvec(const Var& m, const Var& v) {
  Tape& t = detail::same_tape(m, v);
  detail::require_rank("matvec", m, 2);
  detail::require_rank("matvec", v, 1);
  const auto& M = m.value();
  const auto& x = v.value();
  const auto r = M.shape()[0], c = M.shape()[1];
  if (x.numel() != c)
    throw DimensionError("matvec: shape mismatch " + shape_str(M.shape()) + " vs " + shape_str(x.shape()));
  Tensor y(Shape{r});
  for (std::size_t i = 0; i < r; ++i) {
    const double* row = M.data() + i * c;
    double acc = 0.0;
    for (std::size_t j = 0; j < c; ++j) acc += row[j] * x[j];
    y[i] = acc;
  }
  const auto im = m.id(), iv = v.id();
  return t.record(std::move(y), [im, iv, r, c](Tape& tp, std::size_t self) {
    const Tensor gy = tp.grad(self);
    const auto& M = tp.value(im);
    const auto& x = tp.value(iv);
    {
      auto& gM = tp.grad(im);
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) gM[i * c + j] += gy[i] * x[j];
    }
    auto& gx = tp.grad(iv);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) gx[j] += gy[i] * M[i * c + j];
  });
}

/// v{r} * M{r,c} -> {c}
inline Var vecmat(const Var& v, const Var& m) {
  Tape& t = detail::same_tape(v, m);
  detail::require_rank("vecmat", m, 2);
  detail::require_rank("vecmat", v, 1);
  const auto& M = m.value();
  const auto& x = v.value();
  const auto r = M.shape()[0], c = M.shape()[1];
  if (x.numel() != r)
    throw DimensionError("vecmat: shape mismatch " + shape_str(x.shape()) + " vs " + shape_str(M.shape()));
  Tensor y(Shape{c});
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) y[j] += x[i] * M[i * c + j];
  const auto iv = v.id(), im = m.id();
  return t.record(std::move(y), [iv, im, r, c](Tape& tp, std::size_t self) {
    const Tensor gy = tp.grad(self);
    const auto& M = tp.value(im);
    const auto& x = tp.value(iv);
    {
      auto& gx = tp.grad(iv);
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) gx[i] += gy[j] * M[i * c + j];
    }
    auto& gM = tp.grad(im);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) gM[i * c + j] += x[i] * gy[j];
  });
}

/// A{m,k} * B{k,n} -> {m,n}
inline Var matmul(const Var& a, const Var& b) {
  Tape& t = detail::same_tape(a, b);
  detail::require_rank("matmul", a, 2);
  detail::require_rank("matmul", b, 2);
  const auto& A = a.value();
  const auto& B = b.value();
  const auto m = A.shape()[0], k = A.shape()[1], n = B.shape()[1];
  if (B.shape()[0] != k)
    throw DimensionError("matmul: shape mismatch " + shape_str(A.shape()) + " vs " + shape_str(B.shape()));
  Tensor y(Shape{m, n});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = A[i * k + p];
      for (std::size_t j = 0; j < n; ++j) y[i * n + j] += aip * B[p * n + j];
    }
  const auto ia = a.id(), ib = b.id();
  return t.record(std::move(y), [ia, ib, m, k, n](Tape& tp, std::size_t self) {
    const Tensor gy = tp.grad(self);
    const auto& A = tp.value(ia);
    const auto& B = tp.value(ib);
    {
      auto& gA = tp.grad(ia);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          double acc = 0.0;
          for (std::size_t j = 0; j < n; ++j) acc += gy[i * n + j] * B[p * n + j];
          gA[i * k + p] += acc;
        }
    }
    auto& gB = tp.grad(ib);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t p = 0; p < k; ++p) {
        const double aip = A[i * k + p];
        for (std::size_t j = 0; j < n; ++j) gB[p * n + j] += aip * gy[i * n + j];
      }
  });
}

/// Concatenates vectors end to end.
inline Var concat(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concat of nothing");
  Tape& t = *parts.front().tape();
  std::vector<std::size_t> ids, sizes;
  std::vector<double> out;
  for (const auto& p : parts) {
    if (p.tape() != &t) throw Error("concat: operands live on different tapes");
    if (p.value().rank() > 1) detail::require_rank("concat", p, 1);
    ids.push_back(p.id());
    sizes.push_back(p.numel());
    out.insert(out.end(), p.value().values().begin(), p.value().values().end());
  }
  return t.record(Tensor::vector(std::move(out)), [ids, sizes](Tape& tp, std::size_t self) {
    const Tensor gy = tp.grad(self);
    std::size_t off = 0;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      auto& g = tp.grad(ids[k]);
      for (std::size_t i = 0; i < sizes[k]; ++i) g[i] += gy[off + i];
      off += sizes[k];
    }
  });
}

inline Var concat(std::initializer_list<Var> parts) {
  return concat(std::span<const Var>(parts.begin(), parts.size()));
}

/// Stacks equal-length vectors into a {n, d} matrix.
inline Var stack_rows(std::span<const Var> rows) {
  if (rows.empty()) throw DimensionError("stack_rows of nothing");
  Tape& t = *rows.front().tape();
  const auto d = rows.front().numel();
  std::vector<std::size_t> ids;
  std::vector<double> out;
  out.reserve(rows.size() * d);
  for (const auto& r : rows) {
    if (r.tape() != &t) throw Error("stack_rows: operands live on different tapes");
    detail::require_rank("stack_rows", r, 1);
    if (r.numel() != d)
      throw DimensionError("stack_rows: row lengths differ (" + std::to_string(d) + " vs " +
                           std::to_string(r.numel()) + ")");
    ids.push_back(r.id());
    out.insert(out.end(), r.value().values().begin(), r.value().values().end());
  }
  return t.record(Tensor::matrix(rows.size(), d, std::move(out)), [ids, d](Tape& tp, std::size_t self) {
    const Tensor gy = tp.grad(self);
    for (std::size_t k = 0; k < ids.size(); ++k) {
      auto& g = tp.grad(ids[k]);
      for (std::size_t i = 0; i < d; ++i) g[i] += gy[k * d + i];
    }
  });
}

/// Selects rows of a matrix, with repetition allowed.
inline Var gather_rows(const Var& m, std::vector<std::size_t> index) {
  detail::require_rank("gather_rows", m, 2);
  Tape& t = *m.tape();
  const auto& M = m.value();
  const auto n = M.shape()[0], d = M.shape()[1];
  Tensor y(Shape{index.size(), d});
  for (std::size_t k = 0; k < index.size(); ++k) {
    if (index[k] >= n) throw DimensionError("gather_rows: row index out of range");
    std::copy_n(M.data() + index[k] * d, d, y.data() + k * d);
  }
  const auto im = m.id();
  return t.record(std::move(y), [im, index = std::move(index), d](Tape& tp, std::size_t self) {
    const Tensor gy = tp.grad(self);
    auto& g = tp.grad(im);
    for (std::size_t k = 0; k < index.size(); ++k)
      for (std::size_t i = 0; i < d; ++i) g[index[k] * d + i] += gy[k * d + i];
  });
}

inline Var row(const Var& m, std::size_t r) {
  detail::require_rank("row", m, 2);
  Tape& t = *m.tape();
  const auto& M = m.value();
  const auto d = M.shape()[1];
  if (r >= M.shape()[0]) throw DimensionError("row: index out of range");
  Tensor y(Shape{d});
  std::copy_n(M.data() + r * d, d, y.data());
  const auto im = m.id();
  return t.record(std::move(y), [im, r, d](Tape& tp, std::size_t self) {
    const Tensor gy = tp.grad(self);
    auto& g = tp.grad(im);
    for (std::size_t i = 0; i < d; ++i) g[r * d + i] += gy[i];
  });
}

inline Var sum(const Var& a) {
  Tape& t = *a.tape();
  double s = 0.0;
  for (double v : a.value().values()) s += v;
  const auto ia = a.id();
  return t.record(Tensor::scalar(s), [ia](Tape& tp, std::size_t self) {
    const double gy = tp.grad(self)[0];
    auto& g = tp.grad(ia);
    for (auto& v : g.values()) v += gy;
  });
}

/// Mean of all entries.
inline Var mean(const Var& a) {
  if (a.numel() == 0) throw DimensionError("mean of an empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(a.numel()));
}

/// Column-wise mean of a {n, d} matrix -> {d}.
inline Var mean_rows(const Var& m) {
  detail::require_rank("mean_rows", m, 2);
  Tape& t = *m.tape();
  const auto& M = m.value();
  const auto n = M.shape()[0], d = M.shape()[1];
  if (n == 0) throw DimensionError("mean_rows of an empty matrix");
  Tensor y(Shape{d});
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < d; ++i) y[i] += M[k * d + i];
  const double inv = 1.0 / static_cast<double>(n);
  for (auto& v : y.values()) v *= inv;
  const auto im = m.id();
  return t.record(std::move(y), [im, n, d, inv](Tape& tp, std::size_t self) {
    const Tensor gy = tp.grad(self);
    auto& g = tp.grad(im);
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < d; ++i) g[k * d + i] += gy[i] * inv;
  });
}

inline double sigmoid_value(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// log(sigmoid(x)) without overflow.
inline double log_sigmoid_value(double x) {
  return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

inline Var sigmoid(const Var& a) {
  return detail::unary(a, sigmoid_value, [](double, double y) { return y * (1.0 - y); });
}

inline Var tanh(const Var& a) {
  return detail::unary(
      a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

inline Var leaky_relu(const Var& a, double slope) {
  return detail::unary(
      a, [slope](double x) { return x > 0 ? x : slope * x; },
      [slope](double x, double) { return x > 0 ? 1.0 : slope; });
}

inline Var log_sigmoid(const Var& a) {
  return detail::unary(a, log_sigmoid_value, [](double x, double) { return sigmoid_value(-x); });
}

/// Numerically stable softmax over a vector.
inline Var softmax(const Var& a) {
  detail::require_rank("softmax", a, 1);
  Tape& t = *a.tape();
  const auto& x = a.value();
  if (x.numel() == 0) throw DimensionError("softmax of an empty vector");
  const double mx = *std::max_element(x.values().begin(), x.values().end());
  Tensor y(x.shape());
  double z = 0.0;
  for (std::size_t i = 0; i < x.numel(); ++i) z += (y[i] = std::exp(x[i] - mx));
  for (auto& v : y.values()) v /= z;
  const auto ia = a.id();
  return t.record(std::move(y), [ia](Tape& tp, std::size_t self) {
    const auto& y = tp.value(self);
    const Tensor gy = tp.grad(self);
    double dotp = 0.0;
    for (std::size_t i = 0; i < y.numel(); ++i) dotp += gy[i] * y[i];
    auto& g = tp.grad(ia);
    for (std::size_t i = 0; i < y.numel(); ++i) g[i] += y[i] * (gy[i] - dotp);
  });
}

inline Var dot(const Var& a, const Var& b) {
  Tape& t = detail::same_tape(a, b);
  detail::require_rank("dot", a, 1);
  detail::require_same_shape("dot", a, b);
  const auto& av = a.value();
  const auto& bv = b.value();
  double s = 0.0;
  for (std::size_t i = 0; i < av.numel(); ++i) s += av[i] * bv[i];
  const auto ia = a.id(), ib = b.id();
  return t.record(Tensor::scalar(s), [ia, ib](Tape& tp, std::size_t self) {
    const double gy = tp.grad(self)[0];
    const auto& av = tp.value(ia);
    const auto& bv = tp.value(ib);
    {
      auto& ga = tp.grad(ia);
      for (std::size_t i = 0; i < ga.numel(); ++i) ga[i] += gy * bv[i];
    }
    auto& gb = tp.grad(ib);
    for (std::size_t i = 0; i < gb.numel(); ++i) gb[i] += gy * av[i];
  });
}

/// Row-by-row dot products of two {n, d} matrices -> {n}.
inline Var rowwise_dot(const Var& a, const Var& b) {
  Tape& t = detail::same_tape(a, b);
  detail::require_rank("rowwise_dot", a, 2);
  detail::require_same_shape("rowwise_dot", a, b);
  const auto& A = a.value();
  const auto& B = b.value();
  const auto n = A.shape()[0], d = A.shape()[1];
  Tensor y(Shape{n});
  for (std::size_t k = 0; k < n; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) s += A[k * d + i] * B[k * d + i];
    y[k] = s;
  }
  const auto ia = a.id(), ib = b.id();
  return t.record(std::move(y), [ia, ib, n, d](Tape& tp, std::size_t self) {
    const Tensor gy = tp.grad(self);
    const auto& A = tp.value(ia);
    const auto& B = tp.value(ib);
    {
      auto& gA = tp.grad(ia);
      for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < d; ++i) gA[k * d + i] += gy[k] * B[k * d + i];
    }
    auto& gB = tp.grad(ib);
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < d; ++i) gB[k * d + i] += gy[k] * A[k * d + i];
  });
}

inline Var l2_norm(const Var& a) {
  Tape& t = *a.tape();
  double s = 0.0;
  for (double v : a.value().values()) s += v * v;
  const double nrm = std::sqrt(s);
  const auto ia = a.id();
  return t.record(Tensor::scalar(nrm), [ia](Tape& tp, std::size_t self) {
    const double n = tp.value(self)[0];
    if (n == 0.0) return;  // subgradient 0 at the origin
    const double gy = tp.grad(self)[0];
    const auto& x = tp.value(ia);
    auto& g = tp.grad(ia);
    for (std::size_t i = 0; i < g.numel(); ++i) g[i] += gy * x[i] / n;
  });
}

inline Var operator+(const Var& a, const Var& b) { return add(a, b); }
inline Var operator-(const Var& a, const Var& b) { return sub(a, b); }
inline Var operator*(const Var& a, const Var& b) { return mul(a, b); }
inline Var operator*(double s, const Var& a) { return scale(a, s); }

/// Max over coordinates of |analytic - central difference| / max(1, |central difference|)
/// for a scalar function of one tensor.
inline double grad_check(const std::function<Var(Tape&, const Var&)>& f, const Tensor& point, double h = 1e-5) {
  Parameter x("x", point);
  {
    Tape tape;
    const Var y = f(tape, tape.param(x));
    tape.backward(y);
  }
  auto eval = [&](const Tensor& at) {
    Parameter p("x", at);
    Tape tape(false);
    return f(tape, tape.param(p)).item();
  };
  double worst = 0.0;
  Tensor probe = point;
  for (std::size_t i = 0; i < point.numel(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + h;
    const double up = eval(probe);
    probe[i] = orig - h;
    const double down = eval(probe);
    probe[i] = orig;
    const double fd = (up - down) / (2.0 * h);
    worst = std::max(worst, std::abs(x.grad[i] - fd) / std::max(1.0, std::abs(fd)));
  }
  return worst;
}

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  std::size_t coordinates = 0;
};

/// Finite-difference check of a scalar loss over every coordinate of every
/// listed parameter. `loss` must build the loss on the given tape from the
/// parameters' current values.
inline GradCheckReport grad_check_params(const std::function<Var(Tape&)>& loss,
                                         std::span<Parameter* const> params, double h = 1e-5) {
  for (auto* p : params) p->zero_grad();
  {
    Tape tape;
    tape.backward(loss(tape));
  }
  GradCheckReport report;
  for (auto* p : params) {
    for (std::size_t i = 0; i < p->value.numel(); ++i) {
      const double orig = p->value[i];
      p->value[i] = orig + h;
      double up, down;
      {
        Tape tape(false);
        up = loss(tape).item();
      }
      p->value[i] = orig - h;
      {
        Tape tape(false);
        down = loss(tape).item();
      }
      p->value[i] = orig;
      const double fd = (up - down) / (2.0 * h);
      const double err = std::abs(p->grad[i] - fd) / std::max(1.0, std::abs(fd));
      ++report.coordinates;
      if (err > report.max_rel_error) {
        report.max_rel_error = err;
        report.worst_parameter = p->name;
        report.worst_index = i;
      }
    }
  }
  return report;
}

}  // namespace hetembed::ad
