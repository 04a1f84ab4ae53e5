//
// Project dualfuse - Copyright 2026 The dualfuse Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <vector>

#include "dualfuse/chem/molecule.hpp"

namespace dualfuse::chem {

struct ValidityConfig {
  /// Bonded distance must lie in [lo, hi] x (sum of covalent radii).
  double bond_length_lo = 0.8;
  double bond_length_hi = 1.25;
  /// Pairs within this multiple of the radii sum get a single bond in infer_bonds.
  double infer_factor = 1.15;
};

struct ValidityReport {
  std::vector<bool> valence_ok;      // per atom
  std::vector<LigandGraph::Edge> bonds;
  std::vector<bool> bond_length_ok;  // aligned with `bonds`
  bool connected_ok = false;
  bool valid = false;
};

/// Heavy-bond order sum per atom (aromatic counts 1.5), before rounding.
std::vector<double> bond_order_sums(const LigandGraph &g);

ValidityReport validate_assembly(const LigandGraph &g, const Pose &x,
                                 const ValidityConfig &cfg = {});

/// Distance-based single-bond assignment over all pairs.
std::vector<BondType> infer_bonds(const std::vector<std::size_t> &atom_types, const Pose &x,
                                  const ValidityConfig &cfg = {});

}  // namespace dualfuse::chem
