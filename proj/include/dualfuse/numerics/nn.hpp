//
// Project dualfuse - Copyright 2026 The dualfuse Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dualfuse/numerics/autodiff.hpp"
#include "dualfuse/numerics/params.hpp"
#include "dualfuse/numerics/rng.hpp"

namespace dualfuse::num {

/// y = x W (+ b)
struct Linear {
  ParamId weight;
  ParamId bias;
  bool has_bias = true;
  std::size_t in = 0;
  std::size_t out = 0;

  static Linear create(ParamStore &store, const std::string &name, std::size_t in,
                       std::size_t out, Rng &rng, bool bias = true);
  Var operator()(Tape &tape, ParamStore &store, Var x) const;
};

/// Two-layer perceptron, silu(sum_k x_k W_k + b1) W2 + b2.
///
/// The first layer takes its input as separate column blocks so callers can
/// project per-node features once and gather them per edge instead of
/// materializing the concatenation.
struct Mlp {
  std::vector<ParamId> first;
  std::vector<std::size_t> block_dims;
  ParamId bias1;
  ParamId weight2;
  ParamId bias2;
  std::size_t hidden = 0;
  std::size_t out = 0;

  static Mlp create(ParamStore &store, const std::string &name,
                    std::vector<std::size_t> block_dims, std::size_t hidden, std::size_t out,
                    Rng &rng);

  /// x_k W_k for one input block (no bias).
  Var project(Tape &tape, ParamStore &store, std::size_t block, Var x) const;
  /// Applies b1, the activation and the second layer to a summed pre-activation.
  Var finish(Tape &tape, ParamStore &store, Var pre) const;
  Var operator()(Tape &tape, ParamStore &store, std::span<const Var> blocks) const;
};

}  // namespace dualfuse::num
