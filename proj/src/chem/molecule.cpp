//
// Project dualfuse - Copyright 2026 The dualfuse Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "dualfuse/chem/molecule.hpp"

#include <algorithm>
#include <cmath>

namespace dualfuse::chem {

double distance(const Vec3 &a, const Vec3 &b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

std::size_t AtomVocab::from_symbol(std::string_view symbol) {
  if (symbol == "H") throw ChemError("explicit hydrogens are not supported (heavy-atom graphs)");
  for (std::size_t i = 0; i < kSize; ++i)
    if (kSymbols[i] == symbol) return i;
  return kSize - 1;
}

BondType BondVocab::from_name(std::string_view name) {
  for (std::size_t i = 0; i < kSize; ++i)
    if (kNames[i] == name) return static_cast<BondType>(i);
  throw ChemError("unknown bond type '" + std::string(name) + "'");
}

std::size_t ResidueVocab::from_name(std::string_view name) {
  for (std::size_t i = 0; i + 1 < kSize; ++i)
    if (kNames[i] == name) return i;
  return kUnknown;
}

std::size_t pair_index(std::size_t i, std::size_t j, std::size_t n_atoms) {
  if (i == j || i >= n_atoms || j >= n_atoms) throw ChemError("invalid atom pair");
  if (i > j) std::swap(i, j);
  return i * n_atoms - i * (i + 1) / 2 + (j - i - 1);
}

LigandGraph::LigandGraph(std::vector<std::size_t> atom_types)
    : atoms_(std::move(atom_types)), bonds_(pair_count(atoms_.size()), BondType::kNone) {
  for (auto t : atoms_)
    if (t >= AtomVocab::kSize) throw ChemError("atom type out of range");
}

LigandGraph::LigandGraph(std::vector<std::size_t> atom_types, std::vector<BondType> pair_bonds)
    : LigandGraph(std::move(atom_types)) {
  if (pair_bonds.size() != bonds_.size()) throw ChemError("bond list does not match atom count");
  bonds_ = std::move(pair_bonds);
}

void LigandGraph::set_atom_type(std::size_t i, std::size_t type) {
  if (type >= AtomVocab::kSize) throw ChemError("atom type out of range");
  atoms_.at(i) = type;
}

BondType LigandGraph::bond(std::size_t i, std::size_t j) const {
  return bonds_[pair_index(i, j, atoms_.size())];
}

void LigandGraph::set_bond(std::size_t i, std::size_t j, BondType b) {
  bonds_[pair_index(i, j, atoms_.size())] = b;
}

std::vector<LigandGraph::Edge> LigandGraph::edges() const {
  std::vector<Edge> out;
  const std::size_t n = atoms_.size();
  std::size_t p = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j, ++p)
      if (bonds_[p] != BondType::kNone) out.push_back({i, j, bonds_[p]});
  return out;
}

std::vector<std::vector<std::size_t>> LigandGraph::adjacency() const {
  std::vector<std::vector<std::size_t>> adj(atoms_.size());
  for (const auto &e : edges()) {
    adj[e.i].push_back(e.j);
    adj[e.j].push_back(e.i);
  }
  return adj;
}

LigandGraph LigandGraph::permuted(std::span<const std::size_t> perm) const {
  const std::size_t n = atoms_.size();
  if (perm.size() != n) throw ChemError("permutation size mismatch");
  std::vector<std::size_t> atoms(n);
  for (std::size_t i = 0; i < n; ++i) atoms.at(perm[i]) = atoms_[i];
  LigandGraph out(std::move(atoms));
  for (const auto &e : edges()) out.set_bond(perm[e.i], perm[e.j], e.type);
  return out;
}

num::Tensor LigandGraph::atom_onehot() const {
  auto t = num::Tensor::matrix(atoms_.size(), AtomVocab::kSize);
  for (std::size_t i = 0; i < atoms_.size(); ++i) t(i, atoms_[i]) = 1.0;
  return t;
}

num::Tensor LigandGraph::bond_onehot() const {
  auto t = num::Tensor::matrix(bonds_.size(), BondVocab::kSize);
  for (std::size_t p = 0; p < bonds_.size(); ++p) t(p, static_cast<std::size_t>(bonds_[p])) = 1.0;
  return t;
}

num::Tensor Pose::to_tensor() const {
  auto t = num::Tensor::matrix(coords.size(), 3);
  for (std::size_t i = 0; i < coords.size(); ++i)
    for (std::size_t d = 0; d < 3; ++d) t(i, d) = coords[i][d];
  return t;
}

Pose Pose::from_tensor(const num::Tensor &t) {
  if (t.cols() != 3) throw ChemError("pose tensor must have 3 columns");
  Pose p;
  p.coords.resize(t.rows());
  for (std::size_t i = 0; i < t.rows(); ++i)
    for (std::size_t d = 0; d < 3; ++d) p.coords[i][d] = t(i, d);
  return p;
}

Pose Pose::permuted(std::span<const std::size_t> perm) const {
  if (perm.size() != coords.size()) throw ChemError("permutation size mismatch");
  Pose out;
  out.coords.resize(coords.size());
  for (std::size_t i = 0; i < coords.size(); ++i) out.coords.at(perm[i]) = coords[i];
  return out;
}

void Pocket::check() const {
  if (coords.empty()) throw ChemError("pocket '" + id + "' has no atoms");
  if (elements.size() != coords.size() || residues.size() != coords.size() ||
      residue_ids.size() != coords.size()) {
    throw ChemError("pocket '" + id + "' has inconsistent per-atom arrays");
  }
  for (auto e : elements)
    if (e >= AtomVocab::kSize) throw ChemError("pocket element out of range");
  for (auto r : residues)
    if (r >= ResidueVocab::kSize) throw ChemError("pocket residue out of range");
}

num::Tensor Pocket::features() const {
  auto t = num::Tensor::matrix(coords.size(), kFeatureDim);
  for (std::size_t i = 0; i < coords.size(); ++i) {
    t(i, elements[i]) = 1.0;
    t(i, AtomVocab::kSize + residues[i]) = 1.0;
  }
  return t;
}

Vec3 Pocket::center() const {
  Vec3 c{0.0, 0.0, 0.0};
  for (const auto &x : coords)
    for (std::size_t d = 0; d < 3; ++d) c[d] += x[d];
  for (auto &v : c) v /= static_cast<double>(std::max<std::size_t>(coords.size(), 1));
  return c;
}

Pocket Pocket::translated(const Vec3 &offset) const {
  Pocket p = *this;
  for (auto &x : p.coords)
    for (std::size_t d = 0; d < 3; ++d) x[d] += offset[d];
  return p;
}

}  // namespace dualfuse::chem
