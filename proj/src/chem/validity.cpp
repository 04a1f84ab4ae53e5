//
// Project dualfuse - Copyright 2026 The dualfuse Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "dualfuse/chem/validity.hpp"

#include <cmath>
#include <numeric>

namespace dualfuse::chem {

namespace {

double radii_sum(std::size_t a, std::size_t b) {
  return AtomVocab::kCovalentRadius.at(a) + AtomVocab::kCovalentRadius.at(b);
}

bool is_connected(std::size_t n, const std::vector<LigandGraph::Edge> &edges) {
  if (n <= 1) return true;
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::size_t components = n;
  for (const auto &e : edges) {
    const auto a = find(e.i), b = find(e.j);
    if (a != b) {
      parent[a] = b;
      --components;
    }
  }
  return components == 1;
}

}  // namespace

std::vector<double> bond_order_sums(const LigandGraph &g) {
  std::vector<double> sums(g.n_atoms(), 0.0);
  for (const auto &e : g.edges()) {
    const double o = BondVocab::order(e.type);
    sums[e.i] += o;
    sums[e.j] += o;
  }
  return sums;
}

ValidityReport validate_assembly(const LigandGraph &g, const Pose &x, const ValidityConfig &cfg) {
  if (x.size() != g.n_atoms()) {
    throw ChemError("validate_assembly: pose has " + std::to_string(x.size()) +
                    " rows but the graph has " + std::to_string(g.n_atoms()) + " atoms");
  }
  ValidityReport r;
  const auto sums = bond_order_sums(g);
  bool all_ok = true;
  r.valence_ok.resize(g.n_atoms());
  for (std::size_t i = 0; i < g.n_atoms(); ++i) {
    const double rounded = std::floor(sums[i] + 0.5);
    r.valence_ok[i] = rounded <= AtomVocab::kMaxValence.at(g.atom_type(i));
    all_ok = all_ok && r.valence_ok[i];
  }
  r.bonds = g.edges();
  r.bond_length_ok.resize(r.bonds.size());
  for (std::size_t b = 0; b < r.bonds.size(); ++b) {
    const auto &e = r.bonds[b];
    const double ref = radii_sum(g.atom_type(e.i), g.atom_type(e.j));
    const double d = distance(x.coords[e.i], x.coords[e.j]);
    r.bond_length_ok[b] = d >= cfg.bond_length_lo * ref && d <= cfg.bond_length_hi * ref;
    all_ok = all_ok && r.bond_length_ok[b];
  }
  r.connected_ok = is_connected(g.n_atoms(), r.bonds);
  r.valid = all_ok && r.connected_ok;
  return r;
}

std::vector<BondType> infer_bonds(const std::vector<std::size_t> &atom_types, const Pose &x,
                                  const ValidityConfig &cfg) {
  const std::size_t n = atom_types.size();
  if (x.size() != n) throw ChemError("infer_bonds: pose/atom count mismatch");
  std::vector<BondType> bonds(pair_count(n), BondType::kNone);
  std::size_t p = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j, ++p) {
      const double d = distance(x.coords[i], x.coords[j]);
      if (d <= cfg.infer_factor * radii_sum(atom_types[i], atom_types[j])) {
        bonds[p] = BondType::kSingle;
      }
    }
  return bonds;
}

}  // namespace dualfuse::chem
