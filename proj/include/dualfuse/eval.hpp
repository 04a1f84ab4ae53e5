//
// Project dualfuse - Copyright 2026 The dualfuse Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <bitset>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dualfuse/chem/molecule.hpp"
#include "dualfuse/chem/validity.hpp"
#include "dualfuse/dlcf/model.hpp"
#include "dualfuse/sample.hpp"

namespace dualfuse::eval {

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---- validity ---------------------------------------------------------------

bool dual_valid(const chem::LigandGraph &g, const chem::Pose &x1, const chem::Pose &x2,
                const chem::ValidityConfig &cfg = {});

/// Fraction of samples whose shared graph is valid under both poses.
double dual_validity(const std::vector<sample::GeneratedSample> &samples,
                     const chem::ValidityConfig &cfg = {});

// ---- fingerprints -----------------------------------------------------------

inline constexpr std::size_t kFingerprintBits = 1024;
using Fingerprint = std::bitset<kFingerprintBits>;

/// Canonical labels of every simple bonded path with 0..max_bonds bonds,
/// e.g. "C", "C-N", "C=O-C". A path and its reverse share one label.
std::set<std::string> path_labels(const chem::LigandGraph &g, std::size_t max_bonds = 3);

/// 64-bit FNV-1a; stable across platforms, unlike std::hash.
std::uint64_t fnv1a(const std::string &s);

/// Unfolded: the set of label hashes.
std::set<std::uint64_t> path_hashes(const chem::LigandGraph &g, std::size_t max_bonds = 3);
Fingerprint fingerprint(const chem::LigandGraph &g, std::size_t max_bonds = 3);

/// 1 - |A & B| / |A | B|; two empty sets are at distance 0.
double tanimoto_distance(const Fingerprint &a, const Fingerprint &b);
double tanimoto_distance(const std::set<std::uint64_t> &a, const std::set<std::uint64_t> &b);

/// Mean pairwise distance over unordered pairs of folded fingerprints, or of
/// unfolded hash sets when `folded` is false.
double diversity(const std::vector<chem::LigandGraph> &graphs, bool folded = true);

// ---- drug-likeness proxies --------------------------------------------------

struct LipinskiProxy {
  double mass = 0.0;         // heavy atoms plus implicit hydrogens, Da
  std::size_t hbd = 0;       // N/O atoms with spare valence
  std::size_t hba = 0;       // N/O atoms
  std::size_t satisfied = 0; // of the three rules
};

/// Implicit hydrogens fill the heavy-bond valence budget (rounded down).
std::vector<int> implicit_hydrogens(const chem::LigandGraph &g);
LipinskiProxy lipinski(const chem::LigandGraph &g);

// ---- reports ----------------------------------------------------------------

struct SampleMetrics {
  std::size_t index = 0;
  std::size_t n_atoms = 0;
  bool pose1_valid = false, pose2_valid = false, dual_valid = false;
  LipinskiProxy lipinski;
};

struct MetricsReport {
  std::size_t n_samples = 0;
  double dual_validity = 0.0;
  std::optional<double> diversity;  // needs two samples
  double lipinski_mean = 0.0;
  std::vector<SampleMetrics> per_sample;

  /// Reserved keys (qed, sa, logp, vina_*) are written as null.
  nlohmann::json to_json() const;
};

MetricsReport evaluate(const std::vector<sample::GeneratedSample> &samples,
                       const chem::ValidityConfig &cfg = {});

// ---- symmetry verifier ------------------------------------------------------

/// RMSD after optimal rigid superposition (Kabsch, reflections excluded).
double kabsch_rmsd(const chem::Pose &a, const chem::Pose &b);

struct SymmetryTolerances {
  double r1 = 1e-9;            // swap equivariance
  double r2_coords = 1e-6;     // rotation equivariance of positions
  double r2_types = 1e-9;      // rotation invariance of probabilities
  double r2_translation = 1e-12;
  double r3 = 1e-8;            // minimum coupling effect
  double r3_perturbation = 0.1;  // Angstrom
  double r3_fraction = 0.99;   // share of trials that must witness coupling
  double r4_rmsd = 0.1;        // Angstrom
  double r4_fraction = 0.9;

  nlohmann::json to_json() const;
};

struct SymmetryProbe {
  std::size_t trials = 10;
  std::size_t n_atoms_min = 4, n_atoms_max = 8;
  std::size_t pocket_atoms_min = 6, pocket_atoms_max = 14;
  std::uint64_t seed = 0;
};

struct SymmetryReport {
  std::size_t trials = 0;
  double r1_max_dev = 0.0;
  double r2_max_dev = 0.0;
  double r2_type_dev = 0.0;
  double r2_translation_dev = 0.0;
  double r3_min_effect = 0.0;
  std::size_t r3_witnesses = 0;
  bool degenerate_coupling = false;
  // R4 is filled from generated pose pairs, see add_r4.
  std::vector<double> r4_rmsd;
  std::vector<std::pair<double, double>> r4_quantiles;  // (q, value)
  double r4_fraction_above = 0.0;
  bool r4_evaluated = false;

  bool r1_pass = false, r2_pass = false, r3_pass = false, r4_pass = false;
  SymmetryTolerances tol;

  nlohmann::json to_json() const;
};

/// R1-R3 on random states and pockets. Needs a two-target model.
SymmetryReport verify_symmetries(dlcf::DenoiserModel &model, std::size_t steps, const SymmetryProbe &probe,
                                 const SymmetryTolerances &tol = {});

/// Records the Kabsch RMSD distribution between pose 1 and pose 2.
void add_r4(SymmetryReport &report, const std::vector<sample::GeneratedSample> &samples);

/// Linear-interpolated quantile of unsorted data.
double quantile(std::vector<double> v, double q);

}  // namespace dualfuse::eval
