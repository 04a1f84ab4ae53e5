//
// Project dualfuse - Copyright 2026 The dualfuse Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dualfuse/numerics/tensor.hpp"

namespace dualfuse::chem {

class ChemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Vec3 = std::array<double, 3>;

double distance(const Vec3 &a, const Vec3 &b);

// ---- vocabularies -----------------------------------------------------------

/// Heavy-atom element vocabulary. The last slot absorbs Br, I and any other
/// element outside the table; it is written as Br in SDF output.
struct AtomVocab {
  static constexpr std::size_t kSize = 8;
  static constexpr std::array<std::string_view, kSize> kSymbols = {"C", "N", "O", "F",
                                                                    "P", "S", "Cl", "Br"};
  /// Heavy-bond order budget; implicit hydrogens fill the remainder.
  static constexpr std::array<int, kSize> kMaxValence = {4, 3, 2, 1, 5, 6, 1, 1};
  /// Single-bond covalent radii in Angstrom.
  static constexpr std::array<double, kSize> kCovalentRadius = {0.76, 0.71, 0.66, 0.57,
                                                                1.07, 1.05, 1.02, 1.20};

  static std::size_t from_symbol(std::string_view symbol);
  static std::string_view symbol(std::size_t type) { return kSymbols.at(type); }
};

enum class BondType : std::uint8_t { kNone = 0, kSingle = 1, kDouble = 2, kTriple = 3, kAromatic = 4 };

struct BondVocab {
  static constexpr std::size_t kSize = 5;
  static constexpr std::size_t kNoneIndex = 0;
  static constexpr std::array<double, kSize> kOrder = {0.0, 1.0, 2.0, 3.0, 1.5};
  static constexpr std::array<std::string_view, kSize> kNames = {"none", "single", "double",
                                                                  "triple", "aromatic"};
  static BondType from_name(std::string_view name);
  static std::string_view name(BondType b) { return kNames.at(static_cast<std::size_t>(b)); }
  static double order(BondType b) { return kOrder.at(static_cast<std::size_t>(b)); }
};

/// Index of the unordered pair (i, j), i < j, in row-major upper-triangle order.
std::size_t pair_index(std::size_t i, std::size_t j, std::size_t n_atoms);
inline std::size_t pair_count(std::size_t n_atoms) {
  return n_atoms < 2 ? 0 : n_atoms * (n_atoms - 1) / 2;
}

// ---- graphs and poses -------------------------------------------------------

/// Heavy-atom molecular graph. Bond types are stored once per unordered pair,
/// which makes the bond tensor symmetric and self-bond free by construction.
class LigandGraph {
 public:
  LigandGraph() = default;
  explicit LigandGraph(std::vector<std::size_t> atom_types);
  LigandGraph(std::vector<std::size_t> atom_types, std::vector<BondType> pair_bonds);

  std::size_t n_atoms() const { return atoms_.size(); }
  std::size_t atom_type(std::size_t i) const { return atoms_.at(i); }
  const std::vector<std::size_t> &atom_types() const { return atoms_; }
  void set_atom_type(std::size_t i, std::size_t type);

  BondType bond(std::size_t i, std::size_t j) const;
  void set_bond(std::size_t i, std::size_t j, BondType b);
  const std::vector<BondType> &pair_bonds() const { return bonds_; }

  /// Non-none bonds as (i, j, type) with i < j, in pair order.
  struct Edge {
    std::size_t i;
    std::size_t j;
    BondType type;
  };
  std::vector<Edge> edges() const;
  std::vector<std::vector<std::size_t>> adjacency() const;

  /// Applies an atom relabeling: result atom perm[i] takes this graph's atom i.
  LigandGraph permuted(std::span<const std::size_t> perm) const;

  num::Tensor atom_onehot() const;
  num::Tensor bond_onehot() const;

  friend bool operator==(const LigandGraph &, const LigandGraph &) = default;

 private:
  std::vector<std::size_t> atoms_;
  std::vector<BondType> bonds_;
};

struct Pose {
  std::vector<Vec3> coords;

  std::size_t size() const { return coords.size(); }
  num::Tensor to_tensor() const;
  static Pose from_tensor(const num::Tensor &t);
  Pose permuted(std::span<const std::size_t> perm) const;
  friend bool operator==(const Pose &, const Pose &) = default;
};

/// Standard amino acids plus an unknown slot.
struct ResidueVocab {
  static constexpr std::size_t kSize = 21;
  static constexpr std::array<std::string_view, kSize> kNames = {
      "ALA", "ARG", "ASN", "ASP", "CYS", "GLN", "GLU", "GLY", "HIS", "ILE", "LEU",
      "LYS", "MET", "PHE", "PRO", "SER", "THR", "TRP", "TYR", "VAL", "UNK"};
  static constexpr std::size_t kUnknown = kSize - 1;
  static std::size_t from_name(std::string_view name);
  static bool is_standard(std::string_view name) { return from_name(name) != kUnknown; }
};

struct Pocket {
  std::string id;
  std::vector<Vec3> coords;
  std::vector<std::size_t> elements;  // AtomVocab indices
  std::vector<std::size_t> residues;  // ResidueVocab indices
  std::vector<int> residue_ids;

  static constexpr std::size_t kFeatureDim = AtomVocab::kSize + ResidueVocab::kSize;

  std::size_t size() const { return coords.size(); }
  void check() const;
  /// Element one-hot followed by residue one-hot, one row per atom.
  num::Tensor features() const;
  Vec3 center() const;
  Pocket translated(const Vec3 &offset) const;
};

}  // namespace dualfuse::chem
