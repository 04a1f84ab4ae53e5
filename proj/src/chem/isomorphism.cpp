//
// Project dualfuse - Copyright 2026 The dualfuse Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "dualfuse/chem/isomorphism.hpp"

#include <algorithm>
#include <utility>

#include "dualfuse/numerics/rng.hpp"

namespace dualfuse::chem {

namespace {

std::uint64_t combine(std::uint64_t seed, std::uint64_t v) {
  return num::splitmix64(seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2)));
}

}  // namespace

std::vector<std::uint64_t> refined_atom_labels(const LigandGraph &g, std::size_t rounds) {
  const std::size_t n = g.n_atoms();
  const auto edges = g.edges();
  std::vector<std::vector<std::pair<std::size_t, std::uint64_t>>> nbrs(n);
  for (const auto &e : edges) {
    nbrs[e.i].emplace_back(e.j, static_cast<std::uint64_t>(e.type));
    nbrs[e.j].emplace_back(e.i, static_cast<std::uint64_t>(e.type));
  }
  std::vector<std::uint64_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = combine(combine(0x5eed, g.atom_type(i)), nbrs[i].size());
  }
  std::vector<std::uint64_t> next(n);
  std::vector<std::uint64_t> multiset;
  for (std::size_t r = 0; r < rounds; ++r) {
    for (std::size_t i = 0; i < n; ++i) {
      multiset.clear();
      for (const auto &[j, bt] : nbrs[i]) multiset.push_back(combine(bt, labels[j]));
      std::sort(multiset.begin(), multiset.end());
      std::uint64_t h = combine(labels[i], 0xa11ce);
      for (auto m : multiset) h = combine(h, m);
      next[i] = h;
    }
    labels.swap(next);
  }
  return labels;
}

std::uint64_t canonical_hash(const LigandGraph &g) {
  auto labels = refined_atom_labels(g, g.n_atoms());
  std::sort(labels.begin(), labels.end());
  std::uint64_t h = combine(0xd0a1, g.n_atoms());
  h = combine(h, g.edges().size());
  for (auto l : labels) h = combine(h, l);
  return h;
}

namespace {

class Matcher {
 public:
  Matcher(const LigandGraph &a, const LigandGraph &b)
      : a_(a), b_(b), n_(a.n_atoms()), map_(n_, kUnset), used_(n_, false) {
    la_ = refined_atom_labels(a, n_);
    lb_ = refined_atom_labels(b, n_);
  }

  bool run() { return extend(0); }
  std::vector<std::size_t> mapping() const { return map_; }

 private:
  static constexpr std::size_t kUnset = static_cast<std::size_t>(-1);

  bool feasible(std::size_t i, std::size_t j) const {
    if (la_[i] != lb_[j]) return false;
    for (std::size_t k = 0; k < i; ++k) {
      if (a_.bond(i, k) != b_.bond(j, map_[k])) return false;
    }
    return true;
  }

  bool extend(std::size_t i) {
    if (i == n_) return true;
    for (std::size_t j = 0; j < n_; ++j) {
      if (used_[j] || !feasible(i, j)) continue;
      map_[i] = j;
      used_[j] = true;
      if (extend(i + 1)) return true;
      used_[j] = false;
      map_[i] = kUnset;
    }
    return false;
  }

  const LigandGraph &a_;
  const LigandGraph &b_;
  std::size_t n_;
  std::vector<std::size_t> map_;
  std::vector<bool> used_;
  std::vector<std::uint64_t> la_;
  std::vector<std::uint64_t> lb_;
};

}  // namespace

std::optional<std::vector<std::size_t>> graphs_isomorphic(const LigandGraph &g1,
                                                          const LigandGraph &g2) {
  if (g1.n_atoms() != g2.n_atoms()) return std::nullopt;
  if (g1.edges().size() != g2.edges().size()) return std::nullopt;
  auto t1 = g1.atom_types(), t2 = g2.atom_types();
  std::sort(t1.begin(), t1.end());
  std::sort(t2.begin(), t2.end());
  if (t1 != t2) return std::nullopt;
  if (g1.n_atoms() == 0) return std::vector<std::size_t>{};
  Matcher m(g1, g2);
  if (!m.run()) return std::nullopt;
  return m.mapping();
}

}  // namespace dualfuse::chem
