//
// Project dualfuse - Copyright 2026 The dualfuse Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dualfuse/chem/molecule.hpp"
#include "dualfuse/numerics/rng.hpp"

namespace dualfuse::sched {

class ScheduleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Channel { kPosition, kAtom, kBond };

enum class ScheduleKind { kCosine };

ScheduleKind schedule_kind_from_string(const std::string &s);
std::string to_string(ScheduleKind k);

/// Cumulative signal coefficients abar[t], t = 0..T, stored per channel.
class NoiseSchedule {
 public:
  /// Cosine abar (offset s = 0.008) for positions and atom types; the bond
  /// channel evaluates the same curve at min(2t, T) so bonds are absorbed first.
  static NoiseSchedule make(std::size_t steps, ScheduleKind kind = ScheduleKind::kCosine);
  /// Rebuilds from stored values (checkpoints); validates every invariant.
  static NoiseSchedule from_values(ScheduleKind kind, std::vector<double> pos,
                                   std::vector<double> atom, std::vector<double> bond);

  std::size_t steps() const { return pos_.size() - 1; }
  ScheduleKind kind() const { return kind_; }

  double alpha_bar(Channel c, std::size_t t) const;
  /// One-step alpha_t = abar_t / abar_{t-1}, t >= 1.
  double alpha(Channel c, std::size_t t) const;
  double beta(Channel c, std::size_t t) const { return 1.0 - alpha(c, t); }
  const std::vector<double> &alpha_bars(Channel c) const;

  /// Throws ScheduleError when an invariant is violated.
  void validate() const;

  nlohmann::json to_json() const;
  static NoiseSchedule from_json(const nlohmann::json &j);

 private:
  ScheduleKind kind_ = ScheduleKind::kCosine;
  std::vector<double> pos_;
  std::vector<double> atom_;
  std::vector<double> bond_;
};

// ---- noisy states -------------------------------------------------------------

/// (V, B, X_1..X_K) at diffusion step t. Categories are stored as indices,
/// which keeps each atom/pair one-hot by construction.
struct NoisyState {
  chem::LigandGraph graph;
  std::vector<chem::Pose> poses;
  std::size_t t = 0;

  std::size_t n_atoms() const { return graph.n_atoms(); }
};

/// The t = 0 state of a clean ligand with its poses.
NoisyState clean_state(const chem::LigandGraph &g, std::vector<chem::Pose> poses);

/// Draws from q(M_t | M_0). Position noise for pose k uses its own child
/// stream of one fresh seed taken from `rng`, categories another.
NoisyState forward_sample(const NoisyState &clean, std::size_t t, const NoiseSchedule &sched,
                          num::Rng &rng);

/// Base prior at t = T: N(0, I) positions per pocket frame, uniform atom
/// types, every pair none-type.
NoisyState sample_base(std::size_t n_atoms, std::size_t n_targets, const NoiseSchedule &sched,
                       num::Rng &rng);

// ---- transitions and posteriors ----------------------------------------------

/// Row-stochastic Q[i][j] = q(x_t = j | x_{t-1} = i) for one step (uniform
/// mixing for atoms, absorbing into none-type for bonds).
std::vector<std::vector<double>> one_step_matrix(Channel c, std::size_t t, std::size_t categories,
                                                 const NoiseSchedule &sched);
/// Closed-form t-step marginal matrix Qbar[i][j] = q(x_t = j | x_0 = i).
std::vector<std::vector<double>> marginal_matrix(Channel c, std::size_t t, std::size_t categories,
                                                 const NoiseSchedule &sched);

/// q(x_{t-1} | x_t, x0_hat) over categories, normalized. Throws ScheduleError
/// when the normalizer vanishes (inputs are inconsistent).
std::vector<double> categorical_posterior(std::size_t x_t, const std::vector<double> &x0_hat,
                                          std::size_t t, Channel c, const NoiseSchedule &sched);

/// Per-category factors of q(x_t | x_{t-1} = c) for a fixed observed x_t.
std::vector<double> likelihood_factors(std::size_t x_t, std::size_t categories, std::size_t t,
                                       Channel c, const NoiseSchedule &sched);

struct GaussianPosterior {
  double coef_x0 = 0.0;  // mean = coef_x0 * x0_hat + coef_xt * x_t
  double coef_xt = 0.0;
  double variance = 0.0;
};

GaussianPosterior gaussian_posterior(std::size_t t, const NoiseSchedule &sched);
/// Elementwise posterior mean for a whole pose, plus the shared variance.
std::pair<chem::Pose, double> gaussian_posterior(const chem::Pose &x_t, const chem::Pose &x0_hat,
                                                 std::size_t t, const NoiseSchedule &sched);

}  // namespace dualfuse::sched
