//
// Project dualfuse - Copyright 2026 The dualfuse Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <array>
#include <map>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dualfuse/chem/molecule.hpp"
#include "dualfuse/dlcf/model.hpp"
#include "dualfuse/numerics/rng.hpp"
#include "dualfuse/schedule.hpp"
#include "dualfuse/train.hpp"

namespace dualfuse::sample {

class SampleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Mode { kFull, kNoBondGen, kSequential };

/// Accepts "full", "no-bond" / "no_bond_gen", "sequential" / "no_dlcf_sequential".
Mode mode_from_string(const std::string &s);
std::string to_string(Mode m);

struct SampleConfig {
  std::size_t n_atoms = 0;   // 0: draw from the checkpoint's ligand size histogram
  std::size_t steps = 0;     // 0: take T from the checkpoint; otherwise must match it
  std::uint64_t seed = 0;
  std::size_t count = 1;
  Mode mode = Mode::kFull;
  /// Swap harness: pose k draws its noise from the stream of pose 1 - k.
  bool mirror_streams = false;

  void validate() const;
  nlohmann::json to_json() const;
};

/// One reverse transition t -> t-1. Position noise for pose k comes from
/// child stream 1 + pose_streams[k] of a seed drawn from `rng`; categories
/// from child stream 0. With `bonds` false the bond channel is left as is.
sched::NoisyState reverse_step(const sched::NoisyState &state, const dlcf::DenoiserOutput &pred,
                               const sched::NoiseSchedule &sched, num::Rng &rng, bool bonds = true,
                               std::array<std::size_t, 2> pose_streams = {0, 1});

namespace detail {
/// reverse_step with an argmax option for the final transition.
sched::NoisyState reverse_step(const sched::NoisyState &state, const dlcf::DenoiserOutput &pred,
                               const sched::NoiseSchedule &sched, num::Rng &rng, bool bonds,
                               std::array<std::size_t, 2> pose_streams, bool argmax);
}  // namespace detail

struct GeneratedSample {
  std::size_t index = 0;
  chem::LigandGraph graph;
  chem::Pose pose1, pose2;  // in the caller's pocket frames
};

nlohmann::json sample_to_json(const GeneratedSample &s, const std::string &pocket1,
                              const std::string &pocket2, Mode mode);
GeneratedSample sample_from_json(const nlohmann::json &j);

/// Runs the reverse chain for `cfg.count` samples under pockets (p1, p2).
/// The checkpoint's training flags must agree with `cfg.mode`.
std::vector<GeneratedSample> generate(const chem::Pocket &p1, const chem::Pocket &p2,
                                      train::Checkpoint &ck, const SampleConfig &cfg);

/// Ligand size drawn from a histogram of counts.
std::size_t draw_n_atoms(const std::map<std::size_t, std::size_t> &hist, num::Rng &rng);

}  // namespace dualfuse::sample
