//
// Project dualfuse - Copyright 2026 The dualfuse Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "dualfuse/chem/io.hpp"

#include <cstdio>
#include <fstream>

namespace dualfuse::chem {

using nlohmann::json;

json vec3_to_json(const Vec3 &v) { return json::array({v[0], v[1], v[2]}); }

Vec3 vec3_from_json(const json &j) {
  if (!j.is_array() || j.size() != 3) throw ChemError("expected [x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json ligand_to_json(const LigandGraph &g) {
  json atoms = json::array();
  for (auto t : g.atom_types()) atoms.push_back(std::string(AtomVocab::symbol(t)));
  json bonds = json::array();
  for (const auto &e : g.edges()) bonds.push_back({e.i, e.j, std::string(BondVocab::name(e.type))});
  return {{"atoms", atoms}, {"bonds", bonds}};
}

LigandGraph ligand_from_json(const json &j) {
  std::vector<std::size_t> types;
  for (const auto &a : j.at("atoms")) types.push_back(AtomVocab::from_symbol(a.get<std::string>()));
  LigandGraph g(std::move(types));
  for (const auto &b : j.at("bonds")) {
    const auto i = b.at(0).get<std::size_t>(), k = b.at(1).get<std::size_t>();
    if (i == k) throw ChemError("self-bond in ligand record");
    g.set_bond(i, k, BondVocab::from_name(b.at(2).get<std::string>()));
  }
  return g;
}

json pose_to_json(const Pose &p) {
  json out = json::array();
  for (const auto &c : p.coords) out.push_back(vec3_to_json(c));
  return out;
}

Pose pose_from_json(const json &j) {
  Pose p;
  for (const auto &c : j) p.coords.push_back(vec3_from_json(c));
  return p;
}

json pocket_to_json(const Pocket &p) {
  json coords = json::array(), elements = json::array(), residues = json::array();
  for (std::size_t i = 0; i < p.size(); ++i) {
    coords.push_back(vec3_to_json(p.coords[i]));
    elements.push_back(std::string(AtomVocab::symbol(p.elements[i])));
    residues.push_back(std::string(ResidueVocab::kNames[p.residues[i]]));
  }
  return {{"id", p.id},
          {"coords", coords},
          {"elements", elements},
          {"residues", residues},
          {"residue_ids", p.residue_ids}};
}

Pocket pocket_from_json(const json &j) {
  Pocket p;
  p.id = j.at("id").get<std::string>();
  for (const auto &c : j.at("coords")) p.coords.push_back(vec3_from_json(c));
  for (const auto &e : j.at("elements")) p.elements.push_back(AtomVocab::from_symbol(e.get<std::string>()));
  for (const auto &r : j.at("residues")) p.residues.push_back(ResidueVocab::from_name(r.get<std::string>()));
  p.residue_ids = j.at("residue_ids").get<std::vector<int>>();
  p.check();
  return p;
}

std::vector<json> read_jsonl(const std::filesystem::path &path,
                             const std::function<void(std::size_t, const std::string &)> &on_error) {
  std::ifstream is(path);
  if (!is) throw ChemError("cannot open " + path.string());
  std::vector<json> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      rows.push_back(json::parse(line));
    } catch (const json::exception &e) {
      if (!on_error) throw ChemError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
      on_error(lineno, e.what());
    }
  }
  return rows;
}

void write_jsonl(const std::filesystem::path &path, const std::vector<json> &rows) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw ChemError("cannot open " + path.string() + " for writing");
  for (const auto &r : rows) os << r.dump() << '\n';
  if (!os) throw ChemError("write failed for " + path.string());
}

void write_sdf_record(std::ostream &os, const std::string &title, const std::string &comment,
                      const LigandGraph &g, const Pose &x) {
  if (x.size() != g.n_atoms()) throw ChemError("write_sdf_record: pose/atom count mismatch");
  const auto edges = g.edges();
  if (g.n_atoms() > 999 || edges.size() > 999) throw ChemError("molecule too large for V2000");
  char buf[128];
  os << title << '\n' << "  dualfuse          3D\n" << comment << '\n';
  std::snprintf(buf, sizeof buf, "%3zu%3zu  0  0  0  0  0  0  0  0999 V2000\n", g.n_atoms(),
                edges.size());
  os << buf;
  for (std::size_t i = 0; i < g.n_atoms(); ++i) {
    const auto sym = std::string(AtomVocab::symbol(g.atom_type(i)));
    std::snprintf(buf, sizeof buf, "%10.4f%10.4f%10.4f %-3s 0  0  0  0  0  0  0  0  0  0  0  0\n",
                  x.coords[i][0], x.coords[i][1], x.coords[i][2], sym.c_str());
    os << buf;
  }
  for (const auto &e : edges) {
    // V2000 bond codes: 1 single, 2 double, 3 triple, 4 aromatic.
    std::snprintf(buf, sizeof buf, "%3zu%3zu%3d  0\n", e.i + 1, e.j + 1, static_cast<int>(e.type));
    os << buf;
  }
  os << "M  END\n$$$$\n";
}

void write_dual_sdf(std::ostream &os, const std::string &molecule_id, const LigandGraph &g,
                    const Pose &x1, const Pose &x2, const std::string &pocket1_id,
                    const std::string &pocket2_id) {
  write_sdf_record(os, molecule_id, "pose 1 pocket " + pocket1_id, g, x1);
  write_sdf_record(os, molecule_id, "pose 2 pocket " + pocket2_id, g, x2);
}

}  // namespace dualfuse::chem
