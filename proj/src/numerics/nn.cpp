//
// Project dualfuse - Copyright 2026 The dualfuse Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "dualfuse/numerics/nn.hpp"

#include <cmath>
#include <string>

namespace dualfuse::num {

Linear Linear::create(ParamStore &store, const std::string &name, std::size_t in,
                      std::size_t out, Rng &rng, bool bias) {
  Linear l;
  l.in = in;
  l.out = out;
  l.has_bias = bias;
  l.weight = store.add_glorot(name + ".w", in, out, rng);
  if (bias) l.bias = store.add_zeros(name + ".b", {out});
  return l;
}

Var Linear::operator()(Tape &tape, ParamStore &store, Var x) const {
  Var y = matmul(x, tape.param(store, weight));
  return has_bias ? add_row(y, tape.param(store, bias)) : y;
}

Mlp Mlp::create(ParamStore &store, const std::string &name, std::vector<std::size_t> block_dims,
                std::size_t hidden, std::size_t out, Rng &rng) {
  Mlp m;
  m.hidden = hidden;
  m.out = out;
  std::size_t fan_in = 0;
  for (auto d : block_dims) fan_in += d;
  // Each block is a slice of one Glorot-initialized matrix over the full fan-in.
  Tensor w({fan_in, hidden});
  {
    Rng local = rng.split(rng.next_u64());
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + hidden));
    for (auto &x : w.data()) x = local.uniform(-limit, limit);
  }
  std::size_t row = 0;
  for (std::size_t k = 0; k < block_dims.size(); ++k) {
    Tensor wk({block_dims[k], hidden});
    for (std::size_t i = 0; i < block_dims[k]; ++i)
      for (std::size_t j = 0; j < hidden; ++j) wk(i, j) = w(row + i, j);
    row += block_dims[k];
    m.first.push_back(store.add(name + ".w1_" + std::to_string(k), std::move(wk)));
  }
  m.block_dims = std::move(block_dims);
  m.bias1 = store.add_zeros(name + ".b1", {hidden});
  m.weight2 = store.add_glorot(name + ".w2", hidden, out, rng);
  m.bias2 = store.add_zeros(name + ".b2", {out});
  return m;
}

Var Mlp::project(Tape &tape, ParamStore &store, std::size_t block, Var x) const {
  return matmul(x, tape.param(store, first.at(block)));
}

Var Mlp::finish(Tape &tape, ParamStore &store, Var pre) const {
  Var h = silu(add_row(pre, tape.param(store, bias1)));
  return add_row(matmul(h, tape.param(store, weight2)), tape.param(store, bias2));
}

Var Mlp::operator()(Tape &tape, ParamStore &store, std::span<const Var> blocks) const {
  if (blocks.size() != first.size()) throw NumericsError("Mlp: wrong number of input blocks");
  Var pre = project(tape, store, 0, blocks[0]);
  for (std::size_t k = 1; k < blocks.size(); ++k) pre = add(pre, project(tape, store, k, blocks[k]));
  return finish(tape, store, pre);
}

}  // namespace dualfuse::num
