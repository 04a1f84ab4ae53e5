//
// Project dualfuse - Copyright 2026 The dualfuse Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include <json.hpp>

#include "dualfuse/chem/molecule.hpp"
#include "dualfuse/dlcf/graph.hpp"
#include "dualfuse/numerics/archive.hpp"
#include "dualfuse/numerics/autodiff.hpp"
#include "dualfuse/numerics/nn.hpp"
#include "dualfuse/numerics/params.hpp"
#include "dualfuse/numerics/rng.hpp"
#include "dualfuse/schedule.hpp"

namespace dualfuse::dlcf {

struct ModelConfig {
  std::size_t node_dim = 128;
  std::size_t edge_dim = 64;
  std::size_t layers = 6;
  std::size_t knn = 24;
  std::size_t time_dim = 64;
  std::size_t hidden = 128;   // width of every two-layer perceptron
  std::size_t rbf = 16;       // Gaussian basis size per distance statistic
  double rbf_max = 10.0;      // Angstrom span of one distance's basis
  std::size_t targets = 2;    // K; 1 gives the single-pocket ablation
  double coord_eps = 1e-6;    // added to d^2 in the displacement weights

  void validate() const;
  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json &j);
};

/// Sinusoidal embedding of t / T, shape 1 x dim.
num::Tensor time_embedding(std::size_t t, std::size_t steps, std::size_t dim);

/// Target-order-invariant summary of an E x K distance matrix: the row sum,
/// then the K(K-1)/2 pairwise gaps of the sorted row. For K = 2 this is
/// (d1 + d2, |d1 - d2|).
num::Var symmetric_stats(num::Var distances);

struct LayerParams {
  num::Mlp phi_dv;  // ligand edges: [e, rbf(sum), rbf(gap)...] -> d_e
  num::Mlp phi_dp;  // pocket-involved edges: [e, rbf(d)] -> d_e
  num::Mlp phi_m;   // message: [v_src, e~, tau] -> d_v
  num::Mlp phi_r;   // displacement weight: [v_u, v_w, e~, tau] -> 1
  num::Linear node_self;
  num::Linear edge_u, edge_v, edge_e;
  num::Linear edge_msg;  // projects aggregated node messages (d_v) into edge space
};

enum PocketEdgeKind : std::size_t { kLigFromPocket = 0, kPocketFromLig = 1, kPocketPocket = 2 };

class DenoiserModel {
 public:
  static DenoiserModel create(const ModelConfig &cfg, num::Rng &rng);

  const ModelConfig &config() const { return cfg_; }
  num::ParamStore &params() { return store_; }
  const num::ParamStore &params() const { return store_; }
  const LayerParams &layer(std::size_t l) const { return layers_.at(l); }

  num::TensorArchive to_archive(nlohmann::json header) const;
  /// Rebuilds a model from an archive whose header holds {"model": config}.
  static DenoiserModel from_archive(const num::TensorArchive &a);

  // Input embedders and heads.
  num::Linear atom_in, pocket_in, node_time, bond_in, edge_time;
  std::array<num::ParamId, 3> pocket_edge{};  // learned per-kind pocket edge embeddings
  num::Linear atom_head, bond_head;

 private:
  ModelConfig cfg_;
  num::ParamStore store_;
  std::vector<LayerParams> layers_;
};

// ---- one layer, exposed for property tests ----------------------------------

/// Everything that lives on the tape between layers.
struct LayerState {
  num::Var v;               // N x d_v over the fused node set
  num::Var e_ll;            // ordered ligand pairs x d_e
  std::vector<num::Var> r;  // per target, n x 3 ligand coordinates
};

struct LayerInput {
  const DualGraph *graph = nullptr;
  std::vector<num::Tensor> pockets;  // per target, m_k x 3, fixed
  num::Var tau;                      // 1 x time_dim
  double coord_gate = 1.0;           // multiplies every displacement
};

/// sin(pi/2 * t/T): tracks the noise level of the cosine schedule so that
/// displacements shrink as t -> 0.
double coord_gate(std::size_t t, std::size_t steps);

struct EdgeFeatures {
  num::Var ll;                         // e~ on ordered ligand pairs
  std::vector<num::Var> ll_dist;       // per target, d_k on ordered ligand pairs
  std::vector<num::Var> lp_dist;       // per target, d_k on (ligand, pocket) edges
  std::vector<num::Tensor> pp_dist;    // per target, fixed pocket-pocket distances
  std::vector<num::Var> lig_from_pocket;  // e~ for ligand <- pocket messages
  std::vector<num::Var> pocket_from_lig;
  std::vector<num::Var> pocket_pocket;    // both directions: (a<-b) rows then (b<-a)
};

EdgeFeatures edge_features(num::Tape &tape, DenoiserModel &m, const LayerParams &lp,
                           const LayerInput &in, const LayerState &s);

/// Node and ligand-edge update; returns the new state (coordinates unchanged)
/// and the per-node aggregated messages.
std::pair<LayerState, num::Var> message_pass(num::Tape &tape, DenoiserModel &m,
                                             const LayerParams &lp, const LayerInput &in,
                                             const LayerState &s, const EdgeFeatures &ef);

/// Ligand displacement per target from the updated embeddings and the current
/// geometry; pocket coordinates never move.
std::vector<num::Var> coord_update(num::Tape &tape, DenoiserModel &m, const LayerParams &lp,
                                   const LayerInput &in, const LayerState &updated,
                                   const EdgeFeatures &ef);

// ---- full denoiser ----------------------------------------------------------

struct DenoiserVars {
  std::vector<num::Var> x;  // per target, n x 3
  num::Var atom_probs;      // n x N_v
  num::Var bond_probs;      // pairs x N_b in upper-triangle order (absent for n = 1)
};

struct DenoiserOutput {
  std::vector<chem::Pose> x;
  num::Tensor atom_probs;
  num::Tensor bond_probs;
};

/// Runs every layer on `tape`. `pockets` and `state.poses` share the target
/// order; all frames are the caller's (already centered) frames.
DenoiserVars denoise(num::Tape &tape, DenoiserModel &m, const sched::NoisyState &state,
                     std::span<const chem::Pocket> pockets, std::size_t steps);

/// Inference-only convenience wrapper.
DenoiserOutput denoise(DenoiserModel &m, const sched::NoisyState &state,
                       std::span<const chem::Pocket> pockets, std::size_t steps);

}  // namespace dualfuse::dlcf
