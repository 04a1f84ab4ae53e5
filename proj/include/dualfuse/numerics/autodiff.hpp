//
// Project dualfuse - Copyright 2026 The dualfuse Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <unordered_map>
#include <vector>

#include "dualfuse/numerics/params.hpp"
#include "dualfuse/numerics/tensor.hpp"

namespace dualfuse::num {

class Tape;

/// Handle to a value recorded on a Tape.
class Var {
 public:
  Var() = default;
  Var(Tape *tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape *tape() const { return tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

  const Tensor &value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }

 private:
  Tape *tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Dynamically recorded operation tape for reverse-mode differentiation.
///
/// Nodes are appended in evaluation order, so reverse id order is a valid
/// topological order for the backward sweep. A tape built with
/// `record = false` keeps values only (inference mode).
class Tape {
 public:
  using Pullback = std::function<void(Tape &, const Tensor &out_grad)>;

  explicit Tape(bool record = true) : record_(record) {}
  Tape(const Tape &) = delete;
  Tape &operator=(const Tape &) = delete;

  Var constant(Tensor value);
  /// Leaf bound to a stored parameter. Repeated calls return the same node.
  Var param(ParamStore &store, ParamId id);

  /// Sweeps gradients from a scalar loss and accumulates them into the
  /// gradient buffers of every parameter bound to this tape.
  void backward(Var loss);

  const Tensor &value(Var v) const { return nodes_[v.id()].value; }
  /// Gradient of the last backward() with respect to `v` (zeros if unreached).
  Tensor grad(Var v) const;

  bool recording() const { return record_; }
  std::size_t node_count() const { return nodes_.size(); }

  // Used by operation implementations.
  Var push(Tensor value, std::initializer_list<Var> inputs, Pullback pullback);
  Var push(Tensor value, std::span<const Var> inputs, Pullback pullback);
  bool needs_grad(Var v) const { return nodes_[v.id()].needs_grad; }
  Tensor &grad_buffer(Var v);

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    Pullback pullback;
    bool needs_grad = false;
    ParamStore *store = nullptr;
    ParamId param{};
  };
  std::vector<Node> nodes_;
  std::unordered_map<const ParamStore *, std::unordered_map<std::size_t, std::size_t>> param_nodes_;
  bool record_;
};

// ---- operations -----------------------------------------------------------
// All binary ops require operands on the same tape. Shapes follow the rank-2
// view of Tensor (rows x cols).

Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
/// a (m x n) + bias broadcast over rows (bias has n entries).
Var add_row(Var a, Var bias);
/// a (m x n) scaled per row by c (m x 1).
Var mul_col(Var a, Var c);
Var scale(Var a, double c);
Var add_scalar(Var a, double c);
Var silu(Var a);
Var square(Var a);
Var abs(Var a);
Var sqrt(Var a);
Var reciprocal(Var a);
/// log(max(a, floor)); zero gradient where clamped.
Var log_floor(Var a, double floor);
Var softmax_rows(Var a);
/// Divides each row by its sum; rows summing to less than `floor` are divided by `floor`.
Var row_normalize(Var a, double floor = 1e-300);
Var concat_cols(std::span<const Var> parts);
Var slice_cols(Var a, std::size_t begin, std::size_t end);
Var gather_rows(Var a, std::span<const std::size_t> index);
/// out[index[e]] += a[e] for e in ascending order; out has n_rows rows.
Var scatter_add_rows(Var a, std::span<const std::size_t> index, std::size_t n_rows);
Var sum(Var a);
Var mean(Var a);
Var row_sum(Var a);
/// Each row sorted ascending; gradients are routed through the permutation.
Var sort_rows(Var a);
/// Gaussian radial basis expansion of a column (m x 1) -> (m x centers).
Var rbf(Var a, std::span<const double> centers, double gamma);

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(Var a, Var b) { return mul(a, b); }

}  // namespace dualfuse::num
