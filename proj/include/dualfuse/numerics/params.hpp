//
// Project dualfuse - Copyright 2026 The dualfuse Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "dualfuse/numerics/rng.hpp"
#include "dualfuse/numerics/tensor.hpp"

namespace dualfuse::num {

struct ParamId {
  std::size_t index = 0;
  friend bool operator==(ParamId, ParamId) = default;
};

/// Named trainable tensors with their gradient accumulators and Adam moments.
class ParamStore {
 public:
  ParamId add(const std::string &name, Tensor init);
  /// Glorot-uniform initialized (fan_in x fan_out) weight matrix.
  ParamId add_glorot(const std::string &name, std::size_t fan_in, std::size_t fan_out, Rng &rng);
  ParamId add_zeros(const std::string &name, std::vector<std::size_t> shape);

  std::size_t size() const { return entries_.size(); }
  std::size_t scalar_count() const;

  ParamId find(const std::string &name) const;
  bool contains(const std::string &name) const { return by_name_.contains(name); }
  const std::string &name(ParamId id) const { return entries_.at(id.index).name; }

  Tensor &value(ParamId id) { return entries_.at(id.index).value; }
  const Tensor &value(ParamId id) const { return entries_.at(id.index).value; }
  Tensor &grad(ParamId id) { return entries_.at(id.index).grad; }
  const Tensor &grad(ParamId id) const { return entries_.at(id.index).grad; }

  void zero_grad();
  std::uint64_t step() const { return step_; }

  std::vector<ParamId> ids() const;

 private:
  friend struct AdamAccess;
  struct Entry {
    std::string name;
    Tensor value;
    Tensor grad;
    Tensor m;
    Tensor v;
  };
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> by_name_;
  std::uint64_t step_ = 0;
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// One bias-corrected Adam update over every parameter; clears gradients.
void adam_step(ParamStore &store, const AdamConfig &cfg);

/// First moment of a parameter, exposed for tests and checkpoint inspection.
const Tensor &adam_first_moment(const ParamStore &store, ParamId id);

}  // namespace dualfuse::num
