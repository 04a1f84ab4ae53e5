//
// Project dualfuse - Copyright 2026 The dualfuse Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dualfuse/chem/molecule.hpp"

namespace dualfuse::chem {

/// Per-atom labels after `rounds` of Morgan-style neighborhood refinement.
/// Isomorphic atoms (under any graph isomorphism) get equal labels.
std::vector<std::uint64_t> refined_atom_labels(const LigandGraph &g, std::size_t rounds);

/// Permutation-invariant 64-bit graph label (N_M refinement rounds).
/// Equal for isomorphic graphs; collisions are possible, so callers that need
/// certainty confirm with graphs_isomorphic.
std::uint64_t canonical_hash(const LigandGraph &g);

/// Finds a type-preserving bijection `map` with G1 atom i <-> G2 atom map[i]
/// and bond(i, j) == bond(map[i], map[j]) for all pairs. Atoms are assigned in
/// index order trying candidates in ascending order, so the returned mapping
/// is the lexicographically smallest valid one.
std::optional<std::vector<std::size_t>> graphs_isomorphic(const LigandGraph &g1,
                                                          const LigandGraph &g2);

}  // namespace dualfuse::chem
