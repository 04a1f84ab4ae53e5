//
// Project dualfuse - Copyright 2026 The dualfuse Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "dualfuse/numerics/params.hpp"

#include <cmath>

namespace dualfuse::num {

ParamId ParamStore::add(const std::string &name, Tensor init) {
  if (by_name_.contains(name)) throw NumericsError("duplicate parameter name: " + name);
  if (!init.all_finite()) throw NumericsError("non-finite initial value for " + name);
  Entry e;
  e.name = name;
  e.grad = Tensor(init.shape());
  e.m = Tensor(init.shape());
  e.v = Tensor(init.shape());
  e.value = std::move(init);
  entries_.push_back(std::move(e));
  by_name_.emplace(name, entries_.size() - 1);
  return ParamId{entries_.size() - 1};
}

ParamId ParamStore::add_glorot(const std::string &name, std::size_t fan_in, std::size_t fan_out,
                               Rng &rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor w({fan_in, fan_out});
  for (auto &x : w.data()) x = rng.uniform(-limit, limit);
  return add(name, std::move(w));
}

ParamId ParamStore::add_zeros(const std::string &name, std::vector<std::size_t> shape) {
  return add(name, Tensor(std::move(shape)));
}

std::size_t ParamStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto &e : entries_) n += e.value.size();
  return n;
}

ParamId ParamStore::find(const std::string &name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) throw NumericsError("unknown parameter: " + name);
  return ParamId{it->second};
}

void ParamStore::zero_grad() {
  for (auto &e : entries_) e.grad.fill(0.0);
}

std::vector<ParamId> ParamStore::ids() const {
  std::vector<ParamId> out;
  out.reserve(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) out.push_back(ParamId{i});
  return out;
}

struct AdamAccess {
  static void step(ParamStore &s, const AdamConfig &cfg) {
    if (!(cfg.lr > 0.0)) throw NumericsError("adam_step: learning rate must be positive");
    ++s.step_;
    const double t = static_cast<double>(s.step_);
    const double c1 = 1.0 - std::pow(cfg.beta1, t);
    const double c2 = 1.0 - std::pow(cfg.beta2, t);
    for (auto &e : s.entries_) {
      auto val = e.value.data();
      auto g = e.grad.data();
      auto m = e.m.data();
      auto v = e.v.data();
      for (std::size_t i = 0; i < val.size(); ++i) {
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
        const double mhat = m[i] / c1;
        const double vhat = v[i] / c2;
        val[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
        g[i] = 0.0;
      }
    }
  }
  static const Tensor &m(const ParamStore &s, ParamId id) { return s.entries_.at(id.index).m; }
};

void adam_step(ParamStore &store, const AdamConfig &cfg) { AdamAccess::step(store, cfg); }

const Tensor &adam_first_moment(const ParamStore &store, ParamId id) {
  return AdamAccess::m(store, id);
}

}  // namespace dualfuse::num
