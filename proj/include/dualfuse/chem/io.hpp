//
// Project dualfuse - Copyright 2026 The dualfuse Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <filesystem>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dualfuse/chem/molecule.hpp"

namespace dualfuse::chem {

// JSON shapes (see docs/formats.md):
//   ligand: {"atoms": ["C", ...], "bonds": [[i, j, "single"], ...]}
//   pose:   [[x, y, z], ...]
//   pocket: {"id": str, "coords": [[x, y, z], ...], "elements": [str],
//            "residues": [str], "residue_ids": [int]}
nlohmann::json ligand_to_json(const LigandGraph &g);
LigandGraph ligand_from_json(const nlohmann::json &j);
nlohmann::json pose_to_json(const Pose &p);
Pose pose_from_json(const nlohmann::json &j);
nlohmann::json pocket_to_json(const Pocket &p);
Pocket pocket_from_json(const nlohmann::json &j);
nlohmann::json vec3_to_json(const Vec3 &v);
Vec3 vec3_from_json(const nlohmann::json &j);

/// Reads one JSON value per non-empty line. Parse failures are reported
/// through `on_error(line_number, message)` and skipped.
std::vector<nlohmann::json> read_jsonl(
    const std::filesystem::path &path,
    const std::function<void(std::size_t, const std::string &)> &on_error = {});
void write_jsonl(const std::filesystem::path &path, const std::vector<nlohmann::json> &rows);

/// One V2000 MDL molfile record (terminated by $$$$).
void write_sdf_record(std::ostream &os, const std::string &title, const std::string &comment,
                      const LigandGraph &g, const Pose &x);

/// Both poses of a dual sample as two records sharing the molecule id title.
void write_dual_sdf(std::ostream &os, const std::string &molecule_id, const LigandGraph &g,
                    const Pose &x1, const Pose &x2, const std::string &pocket1_id,
                    const std::string &pocket2_id);

}  // namespace dualfuse::chem
