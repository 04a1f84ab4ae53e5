//
// Project dualfuse - Copyright 2026 The dualfuse Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dualfuse/chem/molecule.hpp"
#include "dualfuse/dataset.hpp"
#include "dualfuse/dlcf/model.hpp"
#include "dualfuse/numerics/autodiff.hpp"
#include "dualfuse/schedule.hpp"

namespace dualfuse::train {

class TrainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when the loss exceeds the divergence threshold.
class DivergenceError : public TrainError {
 public:
  using TrainError::TrainError;
};

struct LossWeights {
  double position = 1.0;     // shared by both poses
  double atom = 100.0;
  double bond = 100.0;
  double bond_length = 1.0;

  void validate() const;
  nlohmann::json to_json() const;
  static LossWeights from_json(const nlohmann::json &j);
};

/// Each complex translated so its pocket center of mass is the origin.
struct CenteredInstance {
  std::string id;
  chem::LigandGraph graph;
  std::vector<chem::Pose> poses;
  std::vector<chem::Pocket> pockets;
  std::vector<chem::Vec3> offsets;  // original = centered + offset
};

CenteredInstance center_instance(const data::DualInstance &inst);
chem::Pose restore_frame(const chem::Pose &centered, const chem::Vec3 &offset);

struct LossTerms {
  num::Var total;
  double position = 0.0;  // summed over poses, each the mean squared atom error
  double atom_kl = 0.0;   // mean over atoms
  double bond_kl = 0.0;   // mean over unordered pairs
  double bond_length = 0.0;
  double total_value = 0.0;
};

/// KL(q(. | x_t, x_0) || q(. | x_t, x0_hat)) per row, averaged over rows, on
/// the tape. `probs` holds x0_hat rows.
num::Var categorical_kl(num::Tape &tape, num::Var probs, const std::vector<std::size_t> &x0,
                        const std::vector<std::size_t> &xt, std::size_t t, sched::Channel c,
                        const sched::NoiseSchedule &sched);

/// Weighted denoising objective. `clean` holds ground truth (t = 0) and
/// `noisy` the sampled state the prediction was made from. With
/// `bond_channel` false the bond KL is skipped (bond-free ablation).
LossTerms compute_loss(num::Tape &tape, const dlcf::DenoiserVars &pred,
                       const sched::NoisyState &clean, const sched::NoisyState &noisy,
                       const LossWeights &w, const sched::NoiseSchedule &sched,
                       bool bond_channel = true);

struct TrainConfig {
  std::size_t steps = 2000;      // optimizer steps
  std::size_t batch_size = 1;    // instances per step, gradients accumulated
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  std::size_t diffusion_steps = 100;
  sched::ScheduleKind schedule = sched::ScheduleKind::kCosine;
  LossWeights weights;
  dlcf::ModelConfig model;
  bool no_bond_gen = false;
  bool no_dlcf = false;          // single-pocket model trained on each complex alone
  std::size_t checkpoint_every = 0;
  double divergence_threshold = 1e6;

  void validate() const;
  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json &j);
};

struct LossRecord {
  std::size_t step = 0;
  double total = 0.0;
  double position = 0.0;
  double atom_kl = 0.0;
  double bond_kl = 0.0;
  double bond_length = 0.0;
};

void write_loss_csv(const std::filesystem::path &path, const std::vector<LossRecord> &curve);

/// Everything sampling needs: weights, schedule, training config and the
/// ligand size histogram of the training set.
struct Checkpoint {
  dlcf::DenoiserModel model;
  sched::NoiseSchedule schedule;
  TrainConfig config;
  std::map<std::size_t, std::size_t> n_atoms_histogram;
  std::size_t step = 0;
};

void save_checkpoint(const std::filesystem::path &path, const Checkpoint &ck);
Checkpoint load_checkpoint(const std::filesystem::path &path);

struct FitOptions {
  std::filesystem::path checkpoint_path;  // empty: no periodic checkpoints
  std::function<void(const LossRecord &)> on_step;
};

struct FitResult {
  Checkpoint checkpoint;
  std::vector<LossRecord> curve;
};

FitResult fit(const std::vector<data::DualInstance> &dataset, const TrainConfig &cfg,
              const FitOptions &opts = {});

}  // namespace dualfuse::train
