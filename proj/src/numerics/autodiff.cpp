//
// Project dualfuse - Copyright 2026 The dualfuse Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "dualfuse/numerics/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace dualfuse::num {

const Tensor &Var::value() const { return tape_->value(*this); }

namespace {

Tape &tape_of(Var a) {
  if (!a.valid()) throw NumericsError("operation on an unbound Var");
  return *a.tape();
}

Tape &tape_of(Var a, Var b) {
  if (a.tape() != b.tape()) throw NumericsError("operands recorded on different tapes");
  return tape_of(a);
}

void require_same_shape(const Tensor &a, const Tensor &b, const char *op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw NumericsError(std::string(op) + ": shape mismatch " + a.shape_string() + " vs " +
                        b.shape_string());
  }
}

}  // namespace

Var Tape::constant(Tensor value) {
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Var Tape::param(ParamStore &store, ParamId id) {
  auto &by_index = param_nodes_[&store];
  if (auto it = by_index.find(id.index); it != by_index.end()) return Var(this, it->second);
  Node n;
  n.value = store.value(id);
  n.needs_grad = record_;
  n.store = &store;
  n.param = id;
  nodes_.push_back(std::move(n));
  by_index.emplace(id.index, nodes_.size() - 1);
  return Var(this, nodes_.size() - 1);
}

Var Tape::push(Tensor value, std::initializer_list<Var> inputs, Pullback pullback) {
  return push(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()),
              std::move(pullback));
}

Var Tape::push(Tensor value, std::span<const Var> inputs, Pullback pullback) {
  Node n;
  n.value = std::move(value);
  if (record_) {
    n.needs_grad = std::any_of(inputs.begin(), inputs.end(),
                               [this](Var v) { return nodes_[v.id()].needs_grad; });
    if (n.needs_grad) n.pullback = std::move(pullback);
  }
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Tensor &Tape::grad_buffer(Var v) {
  auto &n = nodes_[v.id()];
  if (n.grad.size() != n.value.size()) n.grad = Tensor(n.value.shape());
  return n.grad;
}

Tensor Tape::grad(Var v) const {
  const auto &n = nodes_[v.id()];
  if (n.grad.size() != n.value.size()) return Tensor(n.value.shape());
  return n.grad;
}

void Tape::backward(Var loss) {
  if (loss.tape() != this) throw NumericsError("backward: loss recorded on another tape");
  if (!record_) throw NumericsError("backward: tape was created without recording");
  if (value(loss).size() != 1) {
    throw NumericsError("backward: loss must be a scalar, got shape " +
                        value(loss).shape_string());
  }
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!nodes_[i].value.all_finite()) {
      throw NumericsError("backward: non-finite value in recorded node " + std::to_string(i));
    }
  }
  for (auto &n : nodes_) n.grad = Tensor();
  grad_buffer(loss)[0] = 1.0;
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    auto &n = nodes_[i];
    if (!n.needs_grad || !n.pullback || n.grad.size() == 0) continue;
    // The pullback may allocate input gradients, which never reallocates nodes_.
    n.pullback(*this, n.grad);
  }
  for (auto &n : nodes_) {
    if (n.store == nullptr || n.grad.size() == 0) continue;
    auto dst = n.store->grad(n.param).data();
    auto src = n.grad.data();
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
  }
}

// ---- operations -----------------------------------------------------------

Var matmul(Var a, Var b) {
  Tape &t = tape_of(a, b);
  const Tensor &A = a.value();
  const Tensor &B = b.value();
  const std::size_t m = A.rows(), k = A.cols(), n = B.cols();
  if (B.rows() != k) {
    throw NumericsError("matmul: inner dimension mismatch " + A.shape_string() + " x " +
                        B.shape_string());
  }
  Tensor C = Tensor::matrix(m, n);
  for (std::size_t i = 0; i < m; ++i) {
    double *c = &C(i, 0);
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = A(i, p);
      const double *brow = &B(p, 0);
      for (std::size_t j = 0; j < n; ++j) c[j] += aip * brow[j];
    }
  }
  return t.push(std::move(C), {a, b}, [a, b, m, k, n](Tape &tp, const Tensor &g) {
    const Tensor &A = tp.value(a);
    const Tensor &B = tp.value(b);
    if (tp.needs_grad(a)) {
      Tensor &ga = tp.grad_buffer(a);
      for (std::size_t i = 0; i < m; ++i) {
        const double *gi = &g(i, 0);
        for (std::size_t p = 0; p < k; ++p) {
          const double *brow = &B(p, 0);
          double s = 0.0;
          for (std::size_t j = 0; j < n; ++j) s += gi[j] * brow[j];
          ga(i, p) += s;
        }
      }
    }
    if (tp.needs_grad(b)) {
      Tensor &gb = tp.grad_buffer(b);
      for (std::size_t i = 0; i < m; ++i) {
        const double *gi = &g(i, 0);
        for (std::size_t p = 0; p < k; ++p) {
          const double aip = A(i, p);
          double *gbrow = &gb(p, 0);
          for (std::size_t j = 0; j < n; ++j) gbrow[j] += aip * gi[j];
        }
      }
    }
  });
}

Var add(Var a, Var b) {
  Tape &t = tape_of(a, b);
  require_same_shape(a.value(), b.value(), "add");
  Tensor out = a.value();
  auto o = out.data();
  auto bv = b.value().data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += bv[i];
  return t.push(std::move(out), {a, b}, [a, b](Tape &tp, const Tensor &g) {
    for (Var v : {a, b}) {
      if (!tp.needs_grad(v)) continue;
      auto gv = tp.grad_buffer(v).data();
      for (std::size_t i = 0; i < gv.size(); ++i) gv[i] += g[i];
    }
  });
}

Var sub(Var a, Var b) {
  Tape &t = tape_of(a, b);
  require_same_shape(a.value(), b.value(), "sub");
  Tensor out = a.value();
  auto o = out.data();
  auto bv = b.value().data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] -= bv[i];
  return t.push(std::move(out), {a, b}, [a, b](Tape &tp, const Tensor &g) {
    if (tp.needs_grad(a)) {
      auto ga = tp.grad_buffer(a).data();
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i];
    }
    if (tp.needs_grad(b)) {
      auto gb = tp.grad_buffer(b).data();
      for (std::size_t i = 0; i < gb.size(); ++i) gb[i] -= g[i];
    }
  });
}

Var mul(Var a, Var b) {
  Tape &t = tape_of(a, b);
  require_same_shape(a.value(), b.value(), "mul");
  Tensor out = a.value();
  auto o = out.data();
  auto bv = b.value().data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] *= bv[i];
  return t.push(std::move(out), {a, b}, [a, b](Tape &tp, const Tensor &g) {
    const auto av = tp.value(a).data();
    const auto bv = tp.value(b).data();
    if (tp.needs_grad(a)) {
      auto ga = tp.grad_buffer(a).data();
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i] * bv[i];
    }
    if (tp.needs_grad(b)) {
      auto gb = tp.grad_buffer(b).data();
      for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += g[i] * av[i];
    }
  });
}

Var add_row(Var a, Var bias) {
  Tape &t = tape_of(a, bias);
  const Tensor &A = a.value();
  const std::size_t m = A.rows(), n = A.cols();
  if (bias.value().size() != n) throw NumericsError("add_row: bias length mismatch");
  Tensor out = A;
  const auto bv = bias.value().data();
  for (std::size_t i = 0; i < m; ++i) {
    double *o = &out(i, 0);
    for (std::size_t j = 0; j < n; ++j) o[j] += bv[j];
  }
  return t.push(std::move(out), {a, bias}, [a, bias, m, n](Tape &tp, const Tensor &g) {
    if (tp.needs_grad(a)) {
      auto ga = tp.grad_buffer(a).data();
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i];
    }
    if (tp.needs_grad(bias)) {
      auto gb = tp.grad_buffer(bias).data();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) gb[j] += g(i, j);
    }
  });
}

Var mul_col(Var a, Var c) {
  Tape &t = tape_of(a, c);
  const Tensor &A = a.value();
  const std::size_t m = A.rows(), n = A.cols();
  if (c.value().size() != m) throw NumericsError("mul_col: column length mismatch");
  Tensor out = A;
  const auto cv = c.value().data();
  for (std::size_t i = 0; i < m; ++i) {
    double *o = &out(i, 0);
    for (std::size_t j = 0; j < n; ++j) o[j] *= cv[i];
  }
  return t.push(std::move(out), {a, c}, [a, c, m, n](Tape &tp, const Tensor &g) {
    const Tensor &A = tp.value(a);
    const auto cv = tp.value(c).data();
    if (tp.needs_grad(a)) {
      Tensor &ga = tp.grad_buffer(a);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) ga(i, j) += g(i, j) * cv[i];
    }
    if (tp.needs_grad(c)) {
      auto gc = tp.grad_buffer(c).data();
      for (std::size_t i = 0; i < m; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += g(i, j) * A(i, j);
        gc[i] += s;
      }
    }
  });
}

namespace {

// Elementwise unary op with derivative expressed through input and output.
template <class F, class D>
Var unary(Var a, F f, D d) {
  Tape &t = tape_of(a);
  Tensor out = a.value();
  for (auto &x : out.data()) x = f(x);
  return t.push(std::move(out), {a}, [a, d](Tape &tp, const Tensor &g) {
    const auto av = tp.value(a).data();
    auto ga = tp.grad_buffer(a).data();
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i] * d(av[i]);
  });
}

}  // namespace

Var scale(Var a, double c) {
  return unary(a, [c](double x) { return c * x; }, [c](double) { return c; });
}

Var add_scalar(Var a, double c) {
  return unary(a, [c](double x) { return x + c; }, [](double) { return 1.0; });
}

Var silu(Var a) {
  return unary(
      a, [](double x) { return x / (1.0 + std::exp(-x)); },
      [](double x) {
        const double s = 1.0 / (1.0 + std::exp(-x));
        return s * (1.0 + x * (1.0 - s));
      });
}

Var square(Var a) {
  return unary(a, [](double x) { return x * x; }, [](double x) { return 2.0 * x; });
}

Var abs(Var a) {
  return unary(
      a, [](double x) { return std::abs(x); },
      [](double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
}

Var sqrt(Var a) {
  return unary(
      a, [](double x) { return std::sqrt(x); }, [](double x) { return 0.5 / std::sqrt(x); });
}

Var reciprocal(Var a) {
  return unary(a, [](double x) { return 1.0 / x; }, [](double x) { return -1.0 / (x * x); });
}

Var log_floor(Var a, double floor) {
  return unary(
      a, [floor](double x) { return std::log(std::max(x, floor)); },
      [floor](double x) { return x > floor ? 1.0 / x : 0.0; });
}

Var softmax_rows(Var a) {
  Tape &t = tape_of(a);
  const Tensor &A = a.value();
  const std::size_t m = A.rows(), n = A.cols();
  Tensor out = Tensor::matrix(m, n);
  for (std::size_t i = 0; i < m; ++i) {
    double mx = A(i, 0);
    for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, A(i, j));
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      out(i, j) = std::exp(A(i, j) - mx);
      s += out(i, j);
    }
    for (std::size_t j = 0; j < n; ++j) out(i, j) /= s;
  }
  const Var self(&t, t.node_count());
  return t.push(std::move(out), {a}, [a, m, n, self](Tape &tp, const Tensor &g) {
    const Tensor &y = tp.value(self);
    Tensor &ga = tp.grad_buffer(a);
    for (std::size_t i = 0; i < m; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < n; ++j) dot += g(i, j) * y(i, j);
      for (std::size_t j = 0; j < n; ++j) ga(i, j) += y(i, j) * (g(i, j) - dot);
    }
  });
}

Var row_normalize(Var a, double floor) {
  Tape &t = tape_of(a);
  const Tensor &A = a.value();
  const std::size_t m = A.rows(), n = A.cols();
  Tensor out = A;
  std::vector<double> denom(m);
  std::vector<bool> clamped(m);
  for (std::size_t i = 0; i < m; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += A(i, j);
    clamped[i] = s < floor;
    denom[i] = clamped[i] ? floor : s;
    for (std::size_t j = 0; j < n; ++j) out(i, j) /= denom[i];
  }
  return t.push(std::move(out), {a},
                [a, m, n, denom = std::move(denom), clamped = std::move(clamped)](
                    Tape &tp, const Tensor &g) {
                  const Tensor &A = tp.value(a);
                  Tensor &ga = tp.grad_buffer(a);
                  for (std::size_t i = 0; i < m; ++i) {
                    const double d = denom[i];
                    if (clamped[i]) {
                      for (std::size_t j = 0; j < n; ++j) ga(i, j) += g(i, j) / d;
                      continue;
                    }
                    // y_j = a_j / S ; dy_j/da_k = delta_jk / S - a_j / S^2
                    double dot = 0.0;
                    for (std::size_t j = 0; j < n; ++j) dot += g(i, j) * A(i, j);
                    for (std::size_t j = 0; j < n; ++j) ga(i, j) += g(i, j) / d - dot / (d * d);
                  }
                });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw NumericsError("concat_cols: no inputs");
  Tape &t = tape_of(parts.front());
  const std::size_t m = parts.front().value().rows();
  std::vector<std::size_t> offsets;
  std::size_t total = 0;
  for (Var p : parts) {
    if (p.tape() != &t) throw NumericsError("concat_cols: operands on different tapes");
    if (p.value().rows() != m) throw NumericsError("concat_cols: row count mismatch");
    offsets.push_back(total);
    total += p.value().cols();
  }
  Tensor out = Tensor::matrix(m, total);
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Tensor &P = parts[k].value();
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < P.cols(); ++j) out(i, offsets[k] + j) = P(i, j);
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return t.push(std::move(out), std::span<const Var>(inputs),
                [inputs, offsets, m](Tape &tp, const Tensor &g) {
                  for (std::size_t k = 0; k < inputs.size(); ++k) {
                    if (!tp.needs_grad(inputs[k])) continue;
                    Tensor &gp = tp.grad_buffer(inputs[k]);
                    const std::size_t c = gp.cols();
                    for (std::size_t i = 0; i < m; ++i)
                      for (std::size_t j = 0; j < c; ++j) gp(i, j) += g(i, offsets[k] + j);
                  }
                });
}

Var slice_cols(Var a, std::size_t begin, std::size_t end) {
  Tape &t = tape_of(a);
  const Tensor &A = a.value();
  if (begin > end || end > A.cols()) throw NumericsError("slice_cols: bad range");
  const std::size_t m = A.rows(), w = end - begin;
  Tensor out = Tensor::matrix(m, w);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < w; ++j) out(i, j) = A(i, begin + j);
  return t.push(std::move(out), {a}, [a, begin, m, w](Tape &tp, const Tensor &g) {
    Tensor &ga = tp.grad_buffer(a);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < w; ++j) ga(i, begin + j) += g(i, j);
  });
}

Var gather_rows(Var a, std::span<const std::size_t> index) {
  Tape &t = tape_of(a);
  const Tensor &A = a.value();
  const std::size_t n = A.cols();
  Tensor out = Tensor::matrix(index.size(), n);
  for (std::size_t e = 0; e < index.size(); ++e) {
    if (index[e] >= A.rows()) throw NumericsError("gather_rows: index out of range");
    std::copy_n(&A(index[e], 0), n, &out(e, 0));
  }
  std::vector<std::size_t> idx(index.begin(), index.end());
  return t.push(std::move(out), {a}, [a, idx = std::move(idx), n](Tape &tp, const Tensor &g) {
    Tensor &ga = tp.grad_buffer(a);
    for (std::size_t e = 0; e < idx.size(); ++e) {
      double *dst = &ga(idx[e], 0);
      const double *src = &g(e, 0);
      for (std::size_t j = 0; j < n; ++j) dst[j] += src[j];
    }
  });
}

Var scatter_add_rows(Var a, std::span<const std::size_t> index, std::size_t n_rows) {
  Tape &t = tape_of(a);
  const Tensor &A = a.value();
  if (index.size() != A.rows()) throw NumericsError("scatter_add_rows: index length mismatch");
  const std::size_t n = A.cols();
  Tensor out = Tensor::matrix(n_rows, n);
  for (std::size_t e = 0; e < index.size(); ++e) {
    if (index[e] >= n_rows) throw NumericsError("scatter_add_rows: index out of range");
    double *dst = &out(index[e], 0);
    const double *src = &A(e, 0);
    for (std::size_t j = 0; j < n; ++j) dst[j] += src[j];
  }
  std::vector<std::size_t> idx(index.begin(), index.end());
  return t.push(std::move(out), {a}, [a, idx = std::move(idx), n](Tape &tp, const Tensor &g) {
    Tensor &ga = tp.grad_buffer(a);
    for (std::size_t e = 0; e < idx.size(); ++e) {
      const double *src = &g(idx[e], 0);
      double *dst = &ga(e, 0);
      for (std::size_t j = 0; j < n; ++j) dst[j] += src[j];
    }
  });
}

Var sum(Var a) {
  Tape &t = tape_of(a);
  double s = 0.0;
  for (double x : a.value().data()) s += x;
  return t.push(Tensor::scalar(s), {a}, [a](Tape &tp, const Tensor &g) {
    const double gv = g[0];
    for (auto &x : tp.grad_buffer(a).data()) x += gv;
  });
}

Var mean(Var a) {
  const double n = static_cast<double>(a.value().size());
  if (n == 0) throw NumericsError("mean of empty tensor");
  return scale(sum(a), 1.0 / n);
}

Var row_sum(Var a) {
  Tape &t = tape_of(a);
  const Tensor &A = a.value();
  const std::size_t m = A.rows(), n = A.cols();
  Tensor out = Tensor::matrix(m, 1);
  for (std::size_t i = 0; i < m; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += A(i, j);
    out(i, 0) = s;
  }
  return t.push(std::move(out), {a}, [a, m, n](Tape &tp, const Tensor &g) {
    Tensor &ga = tp.grad_buffer(a);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) ga(i, j) += g(i, 0);
  });
}

Var sort_rows(Var a) {
  Tape &t = tape_of(a);
  const Tensor &A = a.value();
  const std::size_t m = A.rows(), n = A.cols();
  Tensor out = Tensor::matrix(m, n);
  std::vector<std::size_t> perm(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    auto *p = &perm[i * n];
    std::iota(p, p + n, std::size_t{0});
    std::stable_sort(p, p + n, [&](std::size_t x, std::size_t y) { return A(i, x) < A(i, y); });
    for (std::size_t j = 0; j < n; ++j) out(i, j) = A(i, p[j]);
  }
  return t.push(std::move(out), {a}, [a, m, n, perm = std::move(perm)](Tape &tp, const Tensor &g) {
    Tensor &ga = tp.grad_buffer(a);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) ga(i, perm[i * n + j]) += g(i, j);
  });
}

Var rbf(Var a, std::span<const double> centers, double gamma) {
  Tape &t = tape_of(a);
  const Tensor &A = a.value();
  if (A.cols() != 1) throw NumericsError("rbf: expects a single column");
  const std::size_t m = A.rows(), c = centers.size();
  Tensor out = Tensor::matrix(m, c);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < c; ++j) {
      const double d = A(i, 0) - centers[j];
      out(i, j) = std::exp(-gamma * d * d);
    }
  std::vector<double> mu(centers.begin(), centers.end());
  const Var self(&t, t.node_count());
  return t.push(std::move(out), {a},
                [a, m, c, gamma, mu = std::move(mu), self](Tape &tp, const Tensor &g) {
                  const Tensor &A = tp.value(a);
                  const Tensor &y = tp.value(self);
                  Tensor &ga = tp.grad_buffer(a);
                  for (std::size_t i = 0; i < m; ++i) {
                    double s = 0.0;
                    for (std::size_t j = 0; j < c; ++j)
                      s += g(i, j) * y(i, j) * (-2.0 * gamma * (A(i, 0) - mu[j]));
                    ga(i, 0) += s;
                  }
                });
}

}  // namespace dualfuse::num
