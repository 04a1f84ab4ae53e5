//
// Project dualfuse - Copyright 2026 The dualfuse Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dualfuse/chem/molecule.hpp"

namespace dualfuse::dlcf {

class DlcfError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One pocket-ligand point-cloud graph. Local ids: ligand atoms 0..n-1, pocket
/// atoms n..n+m-1. The ligand block is implicitly complete; only
/// pocket-involved edges are stored, undirected.
struct TargetGraph {
  std::size_t n_lig = 0;
  std::size_t n_pocket = 0;
  std::vector<std::pair<std::size_t, std::size_t>> lig_pocket;     // (ligand u, pocket w)
  std::vector<std::pair<std::size_t, std::size_t>> pocket_pocket;  // (a, b), a < b

  /// Sorted local neighbor ids of a local node.
  std::vector<std::size_t> neighbors(std::size_t local) const;
};

/// Each node links to its k nearest candidates in that target's frame
/// (ligand nodes choose among pocket atoms, pocket nodes among every other
/// node); ties go to the lower id; the result is symmetrized.
TargetGraph knn_graph(std::span<const chem::Vec3> ligand, std::span<const chem::Vec3> pocket,
                      std::size_t k);

/// Augmented graph over V, P_1..P_K. Global ids: ligand 0..n-1, then each
/// pocket block at offsets[k]. Pocket nodes keep their own target's
/// neighbors; ligand nodes take the union over targets. No cross-pocket edges.
struct DualGraph {
  std::size_t n_lig = 0;
  std::vector<std::size_t> offsets;
  std::vector<TargetGraph> targets;

  std::size_t n_targets() const { return targets.size(); }
  std::size_t node_count() const;
  std::vector<std::size_t> neighbors(std::size_t global) const;
  std::size_t ligand_edge_count() const { return n_lig * (n_lig - 1) / 2; }

  // Ordered ligand pairs (u, v), u != v, u-major; row r of every ligand edge tensor.
  std::vector<std::size_t> ll_dst;
  std::vector<std::size_t> ll_src;
  /// Row of the ordered ligand pair (u, v).
  std::size_t ll_row(std::size_t u, std::size_t v) const {
    return u * (n_lig - 1) + (v < u ? v : v - 1);
  }
};

DualGraph fuse_k_targets(std::vector<TargetGraph> graphs);

DualGraph build_dual_graph(std::span<const chem::Vec3> x1, std::span<const chem::Vec3> x2,
                           const chem::Pocket &p1, const chem::Pocket &p2, std::size_t k);

}  // namespace dualfuse::dlcf
