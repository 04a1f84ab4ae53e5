//
// Project dualfuse - Copyright 2026 The dualfuse Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>

#include "dualfuse/numerics/autodiff.hpp"
#include "dualfuse/numerics/params.hpp"

namespace dualfuse::num {

struct GradCheckReport {
  double max_rel_err = 0.0;
  double max_abs_err = 0.0;
  std::size_t coords_checked = 0;
  std::string worst_param;
  std::size_t worst_index = 0;
  bool pass = false;
};

/// Builds a scalar loss on the given tape from parameters in the store.
using LossFn = std::function<Var(Tape &)>;

/// Compares reverse-mode gradients with central differences
/// (f(p+h) - f(p-h)) / 2h for every coordinate of `params` (or the first
/// `max_coords_per_param` of each). Relative error uses the denominator
/// max(|analytic|, |numeric|, 1e-12); pass iff max relative error <= tol.
///
/// Throws NumericsError when fn is not deterministic at the base point.
GradCheckReport finite_diff_check(const LossFn &fn, ParamStore &store,
                                  std::span<const ParamId> params, double h, double tol,
                                  std::size_t max_coords_per_param =
                                      std::numeric_limits<std::size_t>::max());

}  // namespace dualfuse::num
