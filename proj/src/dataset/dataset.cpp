//
// Project dualfuse - Copyright 2026 The dualfuse Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "dualfuse/dataset.hpp"

#include <map>
#include <optional>
#include <set>
#include <tuple>
#include <unordered_map>

#include "dualfuse/chem/io.hpp"
#include "dualfuse/chem/isomorphism.hpp"

namespace dualfuse::data {

using nlohmann::json;

void ComplexRecord::check() const {
  if (target.empty()) throw DatasetError("record '" + id + "' has an empty target identifier");
  if (ligand.n_atoms() == 0) throw DatasetError("record '" + id + "' has an empty ligand");
  if (pose.size() != ligand.n_atoms())
    throw DatasetError("record '" + id + "' pose rows do not match ligand atoms");
}

void DualInstance::check() const {
  const std::size_t n = graph.n_atoms();
  if (n == 0 || x1.size() != n || x2.size() != n)
    throw DatasetError("instance '" + id + "' pose rows do not match ligand atoms");
  p1.check();
  p2.check();
  if (!pockets_distinct(p1, p2)) throw DatasetError("instance '" + id + "' pockets not distinct");
}

chem::Pocket extract_pocket(const ComplexRecord &rec, double cutoff) {
  if (rec.ligand.n_atoms() == 0 || rec.pose.size() == 0)
    throw DatasetError("extract_pocket: empty ligand in '" + rec.id + "'");
  if (rec.protein.empty()) throw DatasetError("extract_pocket: no protein atoms in '" + rec.id + "'");

  using Key = std::tuple<std::string, int, std::string>;
  std::set<Key> selected;
  for (const auto &a : rec.protein) {
    if (!chem::ResidueVocab::is_standard(a.residue)) continue;
    const Key key{a.chain, a.residue_id, a.residue};
    if (selected.count(key)) continue;
    for (const auto &x : rec.pose.coords) {
      if (chem::distance(a.coord, x) <= cutoff) {
        selected.insert(key);
        break;
      }
    }
  }

  chem::Pocket p;
  p.id = rec.target;
  for (const auto &a : rec.protein) {
    if (!selected.count(Key{a.chain, a.residue_id, a.residue})) continue;
    if (a.element == "H" || a.element == "D") continue;
    p.coords.push_back(a.coord);
    p.elements.push_back(chem::AtomVocab::from_symbol(a.element));
    p.residues.push_back(chem::ResidueVocab::from_name(a.residue));
    p.residue_ids.push_back(a.residue_id);
  }
  if (p.coords.empty())
    throw EmptyPocketError("no standard residue within " + std::to_string(cutoff) +
                           " A of the ligand in '" + rec.id + "'");
  return p;
}

bool pockets_distinct(const chem::Pocket &a, const chem::Pocket &b) { return a.id != b.id; }

json DerivationReport::to_json() const {
  return {{"records_read", records_read},
          {"parse_errors", parse_errors},
          {"empty_pockets", empty_pockets},
          {"total_ligands", unique_ligands},
          {"multi_target_ligands", multi_target_ligands},
          {"repeated_occurrences", repeated_occurrences},
          {"tuples", tuples},
          {"geometric_near_duplicate_screen", "not applied; pockets distinguished by identifier"},
          {"errors", errors}};
}

namespace {

struct LigandClass {
  const chem::LigandGraph *graph = nullptr;  // first member; later members map onto it
  // One representative per target, in order of first appearance.
  std::vector<std::string> targets;
  std::vector<std::size_t> reps;
  std::vector<std::vector<std::size_t>> maps;  // class atom i -> record atom maps[k][i]
  std::vector<chem::Pocket> pockets;
};

}  // namespace

Derivation derive_pairs(const std::vector<ComplexRecord> &records, double cutoff) {
  Derivation out;
  auto &rep = out.report;
  rep.records_read = records.size();

  std::vector<LigandClass> classes;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> by_hash;

  for (std::size_t r = 0; r < records.size(); ++r) {
    const auto &rec = records[r];
    try {
      rec.check();
    } catch (const std::exception &e) {
      ++rep.parse_errors;
      rep.errors.push_back(e.what());
      continue;
    }
    auto &bucket = by_hash[chem::canonical_hash(rec.ligand)];
    LigandClass *cls = nullptr;
    std::vector<std::size_t> map;
    for (auto ci : bucket) {
      if (auto m = chem::graphs_isomorphic(*classes[ci].graph, rec.ligand)) {
        cls = &classes[ci];
        map = std::move(*m);
        break;
      }
    }
    if (!cls) {
      bucket.push_back(classes.size());
      classes.push_back({});
      cls = &classes.back();
      cls->graph = &rec.ligand;
      map.resize(rec.ligand.n_atoms());
      for (std::size_t i = 0; i < map.size(); ++i) map[i] = i;
    }
    bool seen = false;
    for (const auto &t : cls->targets) seen = seen || t == rec.target;
    if (seen) {
      ++rep.repeated_occurrences;
      continue;
    }
    chem::Pocket pocket;
    try {
      pocket = extract_pocket(rec, cutoff);
    } catch (const DatasetError &e) {
      ++rep.empty_pockets;
      rep.errors.push_back(e.what());
      continue;
    }
    cls->targets.push_back(rec.target);
    cls->reps.push_back(r);
    cls->maps.push_back(std::move(map));
    cls->pockets.push_back(std::move(pocket));
  }

  for (const auto &cls : classes) {
    if (cls.reps.empty()) continue;
    ++rep.unique_ligands;
    if (cls.reps.size() >= 2) ++rep.multi_target_ligands;
    for (std::size_t a = 0; a < cls.reps.size(); ++a) {
      for (std::size_t b = a + 1; b < cls.reps.size(); ++b) {
        const auto &ra = records[cls.reps[a]];
        const auto &rb = records[cls.reps[b]];
        // Pose 1 takes ra's atom order; pose 2 is reindexed through the
        // class mappings so row i of both poses is the same atom.
        const auto &ma = cls.maps[a];
        const auto &mb = cls.maps[b];
        const std::size_t n = ma.size();
        std::vector<std::size_t> a_to_class(n);
        for (std::size_t i = 0; i < n; ++i) a_to_class[ma[i]] = i;
        DualInstance d;
        d.id = ra.id + "|" + rb.id;
        d.graph = ra.ligand;
        d.x1 = ra.pose;
        d.x2.coords.resize(n);
        for (std::size_t i = 0; i < n; ++i) d.x2.coords[i] = rb.pose.coords[mb[a_to_class[i]]];
        d.p1 = cls.pockets[a];
        d.p2 = cls.pockets[b];
        d.sources = {ra.id, rb.id};
        out.instances.push_back(std::move(d));
      }
    }
  }
  rep.tuples = out.instances.size();
  return out;
}

Derivation derive_pairs(const std::vector<json> &rows, double cutoff) {
  std::vector<ComplexRecord> records;
  std::vector<std::string> errors;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    try {
      records.push_back(record_from_json(rows[i]));
    } catch (const std::exception &e) {
      errors.push_back("record " + std::to_string(i) + ": " + e.what());
    }
  }
  auto d = derive_pairs(records, cutoff);
  d.report.records_read = rows.size();
  d.report.parse_errors += errors.size();
  d.report.errors.insert(d.report.errors.begin(), errors.begin(), errors.end());
  return d;
}

// ---- JSON ---------------------------------------------------------------------

json record_to_json(const ComplexRecord &r) {
  json protein = json::array();
  for (const auto &a : r.protein)
    protein.push_back({{"element", a.element},
                       {"residue", a.residue},
                       {"residue_id", a.residue_id},
                       {"chain", a.chain},
                       {"coord", chem::vec3_to_json(a.coord)}});
  return {{"id", r.id},
          {"target", r.target},
          {"ligand", chem::ligand_to_json(r.ligand)},
          {"pose", chem::pose_to_json(r.pose)},
          {"protein", protein}};
}

ComplexRecord record_from_json(const json &j) {
  try {
    ComplexRecord r;
    r.id = j.at("id").get<std::string>();
    r.target = j.at("target").get<std::string>();
    r.ligand = chem::ligand_from_json(j.at("ligand"));
    r.pose = chem::pose_from_json(j.at("pose"));
    for (const auto &a : j.at("protein")) {
      ProteinAtom p;
      p.element = a.at("element").get<std::string>();
      p.residue = a.at("residue").get<std::string>();
      p.residue_id = a.at("residue_id").get<int>();
      p.chain = a.value("chain", std::string{});
      p.coord = chem::vec3_from_json(a.at("coord"));
      r.protein.push_back(std::move(p));
    }
    r.check();
    return r;
  } catch (const json::exception &e) {
    throw DatasetError(std::string("malformed complex record: ") + e.what());
  } catch (const chem::ChemError &e) {
    throw DatasetError(std::string("malformed complex record: ") + e.what());
  }
}

json instance_to_json(const DualInstance &d) {
  return {{"id", d.id},
          {"sources", d.sources},
          {"ligand", chem::ligand_to_json(d.graph)},
          {"pose1", chem::pose_to_json(d.x1)},
          {"pose2", chem::pose_to_json(d.x2)},
          {"pocket1", chem::pocket_to_json(d.p1)},
          {"pocket2", chem::pocket_to_json(d.p2)}};
}

DualInstance instance_from_json(const json &j) {
  try {
    DualInstance d;
    d.id = j.at("id").get<std::string>();
    d.sources = j.at("sources").get<std::array<std::string, 2>>();
    d.graph = chem::ligand_from_json(j.at("ligand"));
    d.x1 = chem::pose_from_json(j.at("pose1"));
    d.x2 = chem::pose_from_json(j.at("pose2"));
    d.p1 = chem::pocket_from_json(j.at("pocket1"));
    d.p2 = chem::pocket_from_json(j.at("pocket2"));
    d.check();
    return d;
  } catch (const json::exception &e) {
    throw DatasetError(std::string("malformed dual instance: ") + e.what());
  } catch (const chem::ChemError &e) {
    throw DatasetError(std::string("malformed dual instance: ") + e.what());
  }
}

std::vector<DualInstance> read_instances(const std::filesystem::path &path) {
  std::vector<DualInstance> out;
  std::size_t line = 0;
  for (const auto &row : chem::read_jsonl(path)) {
    ++line;
    try {
      out.push_back(instance_from_json(row));
    } catch (const DatasetError &e) {
      throw DatasetError(path.string() + ": row " + std::to_string(line) + ": " + e.what());
    }
  }
  return out;
}

void write_instances(const std::filesystem::path &path, const std::vector<DualInstance> &v) {
  std::vector<json> rows;
  rows.reserve(v.size());
  for (const auto &d : v) rows.push_back(instance_to_json(d));
  chem::write_jsonl(path, rows);
}

}  // namespace dualfuse::data
