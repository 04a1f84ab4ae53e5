//
// Project dualfuse - Copyright 2026 The dualfuse Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dualfuse/chem/molecule.hpp"

namespace dualfuse::data {

class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// No standard-residue atom lies within the cutoff of the ligand.
class EmptyPocketError : public DatasetError {
 public:
  using DatasetError::DatasetError;
};

struct ProteinAtom {
  chem::Vec3 coord{};
  std::string element;  // symbol as read; hydrogens are skipped when building pockets
  std::string residue;  // three-letter residue name
  int residue_id = 0;
  std::string chain;
};

/// One ligand bound to one target, everything in the complex frame.
struct ComplexRecord {
  std::string id;
  std::string target;
  chem::LigandGraph ligand;
  chem::Pose pose;
  std::vector<ProteinAtom> protein;

  void check() const;
};

/// (G, X1, X2, P1, P2) with both poses indexed like G.
struct DualInstance {
  std::string id;
  chem::LigandGraph graph;
  chem::Pose x1;
  chem::Pose x2;
  chem::Pocket p1;
  chem::Pocket p2;
  std::array<std::string, 2> sources;  // record ids behind pose 1 / pose 2

  void check() const;
};

/// All heavy atoms of standard residues with any atom within `cutoff` (closed)
/// of any ligand atom. The pocket id is the record's target.
chem::Pocket extract_pocket(const ComplexRecord &rec, double cutoff = 10.0);

bool pockets_distinct(const chem::Pocket &a, const chem::Pocket &b);

struct DerivationReport {
  std::size_t records_read = 0;
  std::size_t parse_errors = 0;
  std::size_t empty_pockets = 0;
  std::size_t unique_ligands = 0;         // isomorphism classes
  std::size_t multi_target_ligands = 0;   // classes seen under >= 2 targets
  std::size_t repeated_occurrences = 0;   // same class, same target, not kept
  std::size_t tuples = 0;
  std::vector<std::string> errors;

  nlohmann::json to_json() const;
};

struct Derivation {
  std::vector<DualInstance> instances;
  DerivationReport report;
};

/// Groups ligands by canonical hash, confirms with graphs_isomorphic, keeps the
/// first occurrence per target and emits every unordered cross-target pair.
Derivation derive_pairs(const std::vector<ComplexRecord> &records, double cutoff = 10.0);
/// Same, from raw JSON rows; malformed rows are reported and skipped.
Derivation derive_pairs(const std::vector<nlohmann::json> &rows, double cutoff = 10.0);

nlohmann::json record_to_json(const ComplexRecord &r);
ComplexRecord record_from_json(const nlohmann::json &j);
nlohmann::json instance_to_json(const DualInstance &d);
DualInstance instance_from_json(const nlohmann::json &j);

std::vector<DualInstance> read_instances(const std::filesystem::path &path);
void write_instances(const std::filesystem::path &path, const std::vector<DualInstance> &v);

}  // namespace dualfuse::data

namespace dualfuse::num {
class Rng;
}

namespace dualfuse::data {

struct MockConfig {
  std::size_t ligands = 5;
  std::size_t targets = 3;        // distinct targets each ligand is bound in
  std::size_t same_target_repeats = 0;  // extra occurrences under an already used target
  std::size_t min_atoms = 4;
  std::size_t max_atoms = 9;
  std::size_t pocket_min = 20;
  std::size_t pocket_max = 60;
  std::size_t rejection_budget = 10000;
};

/// Synthetic complexes: valid small ligands with one independently embedded
/// conformer per occurrence, each surrounded by a shell of residues, plus
/// distant and non-standard residues that extraction must drop.
std::vector<ComplexRecord> mock_records(const MockConfig &cfg, num::Rng &rng);

/// Instances derive_pairs must produce for mock_records(cfg).
std::size_t expected_mock_pairs(const MockConfig &cfg);

}  // namespace dualfuse::data
