//
// Project dualfuse - Copyright 2026 The dualfuse Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "dualfuse/numerics/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace dualfuse::num {

namespace {

double evaluate(const LossFn &fn) {
  Tape tape(false);
  return fn(tape).value().item();
}

}  // namespace

GradCheckReport finite_diff_check(const LossFn &fn, ParamStore &store,
                                  std::span<const ParamId> params, double h, double tol,
                                  std::size_t max_coords_per_param) {
  if (!(h > 0.0)) throw NumericsError("finite_diff_check: step must be positive");

  const double base = evaluate(fn);
  if (evaluate(fn) != base) {
    throw NumericsError("finite_diff_check: loss function is not deterministic");
  }

  std::vector<Tensor> saved_grads;
  for (ParamId id : params) saved_grads.push_back(store.grad(id));
  for (ParamId id : params) store.grad(id).fill(0.0);
  {
    Tape tape;
    Var loss = fn(tape);
    tape.backward(loss);
  }
  std::vector<Tensor> analytic;
  for (ParamId id : params) analytic.push_back(store.grad(id));
  for (std::size_t i = 0; i < params.size(); ++i) store.grad(params[i]) = saved_grads[i];

  GradCheckReport report;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Tensor &value = store.value(params[pi]);
    const std::size_t n = std::min(value.size(), max_coords_per_param);
    for (std::size_t c = 0; c < n; ++c) {
      const double orig = value[c];
      value[c] = orig + h;
      const double fp = evaluate(fn);
      value[c] = orig - h;
      const double fm = evaluate(fn);
      value[c] = orig;

      const double numeric = (fp - fm) / (2.0 * h);
      const double a = analytic[pi][c];
      const double abs_err = std::abs(a - numeric);
      const double rel_err = abs_err / std::max({std::abs(a), std::abs(numeric), 1e-12});
      report.max_abs_err = std::max(report.max_abs_err, abs_err);
      if (rel_err > report.max_rel_err || report.coords_checked == 0) {
        report.max_rel_err = std::max(report.max_rel_err, rel_err);
        report.worst_param = store.name(params[pi]);
        report.worst_index = c;
      }
      ++report.coords_checked;
    }
  }
  report.pass = report.max_rel_err <= tol;
  return report;
}

}  // namespace dualfuse::num
