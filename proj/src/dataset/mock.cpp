//
// Project dualfuse - Copyright 2026 The dualfuse Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <cmath>
#include <optional>

#include "dualfuse/chem/isomorphism.hpp"
#include "dualfuse/chem/validity.hpp"
#include "dualfuse/dataset.hpp"
#include "dualfuse/numerics/rng.hpp"

namespace dualfuse::data {

namespace {

using chem::Vec3;

// C N O F P S Cl Br; phosphorus and bromine stay out of the mock chemistry.
constexpr std::array<double, chem::AtomVocab::kSize> kTypeWeights = {0.60, 0.15, 0.15, 0.04,
                                                                     0.00, 0.03, 0.03, 0.00};

std::size_t weighted_pick(num::Rng &rng) {
  double u = rng.uniform();
  for (std::size_t i = 0; i < kTypeWeights.size(); ++i) {
    if (u < kTypeWeights[i]) return i;
    u -= kTypeWeights[i];
  }
  return 0;
}

Vec3 unit_vector(num::Rng &rng) {
  for (;;) {
    Vec3 v{rng.normal(), rng.normal(), rng.normal()};
    const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    if (n > 1e-8) return {v[0] / n, v[1] / n, v[2] / n};
  }
}

using Mat3 = std::array<std::array<double, 3>, 3>;

Mat3 random_rotation(num::Rng &rng) {
  double q[4];
  double n = 0.0;
  for (auto &x : q) {
    x = rng.normal();
    n += x * x;
  }
  n = std::sqrt(n);
  for (auto &x : q) x /= n;
  const double w = q[0], x = q[1], y = q[2], z = q[3];
  return {{{1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)},
           {2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)},
           {2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)}}};
}

Vec3 apply(const Mat3 &r, const Vec3 &v, const Vec3 &shift) {
  Vec3 o{};
  for (int i = 0; i < 3; ++i) o[i] = r[i][0] * v[0] + r[i][1] * v[1] + r[i][2] * v[2] + shift[i];
  return o;
}

double radius(std::size_t type) { return chem::AtomVocab::kCovalentRadius[type]; }

// A spanning tree grown in index order (parent[i] < i), with the bond order
// to the parent; geometry is re-embedded independently per occurrence.
struct Template {
  chem::LigandGraph graph;
  std::vector<std::size_t> parent;
};

Template random_template(std::size_t n, num::Rng &rng, std::size_t budget) {
  for (std::size_t attempt = 0; attempt < budget; ++attempt) {
    std::vector<std::size_t> types(n);
    for (auto &t : types) t = weighted_pick(rng);
    chem::LigandGraph g(types);
    std::vector<int> free(n);
    for (std::size_t i = 0; i < n; ++i) free[i] = chem::AtomVocab::kMaxValence[types[i]];
    std::vector<std::size_t> parent(n, 0);
    bool ok = true;
    for (std::size_t i = 1; i < n && ok; ++i) {
      std::vector<std::size_t> cand;
      for (std::size_t j = 0; j < i; ++j)
        if (free[j] >= 1) cand.push_back(j);
      if (cand.empty() || free[i] < 1) {
        ok = false;
        break;
      }
      const std::size_t p = cand[rng.uniform_int(cand.size())];
      int order = 1;
      const int room = std::min(free[p], free[i]);
      if (room >= 2 && rng.bernoulli(0.2)) order = 2;
      if (room >= 3 && rng.bernoulli(0.1)) order = 3;
      g.set_bond(p, i, static_cast<chem::BondType>(order));
      free[p] -= order;
      free[i] -= order;
      parent[i] = p;
    }
    if (ok) return {std::move(g), std::move(parent)};
  }
  throw DatasetError("mock ligand rejection budget exhausted");
}

double bond_factor(chem::BondType b) {
  switch (b) {
    case chem::BondType::kDouble: return 0.92;
    case chem::BondType::kTriple: return 0.86;
    default: return 1.0;
  }
}

// Non-bonded atoms stay at least this multiple of their radii sum apart, well
// clear of the bond inference window.
constexpr double kClash = 1.35;

std::optional<chem::Pose> embed(const Template &tp, num::Rng &rng) {
  const std::size_t n = tp.graph.n_atoms();
  chem::Pose x;
  x.coords.assign(n, Vec3{0, 0, 0});
  for (std::size_t i = 1; i < n; ++i) {
    const std::size_t p = tp.parent[i];
    const auto &types = tp.graph.atom_types();
    const double len = (radius(types[p]) + radius(types[i])) * bond_factor(tp.graph.bond(p, i));
    bool placed = false;
    for (int tries = 0; tries < 200 && !placed; ++tries) {
      const Vec3 u = unit_vector(rng);
      const Vec3 c{x.coords[p][0] + len * u[0], x.coords[p][1] + len * u[1],
                   x.coords[p][2] + len * u[2]};
      placed = true;
      for (std::size_t j = 0; j < i && placed; ++j) {
        if (j == p) continue;
        if (chem::distance(c, x.coords[j]) < kClash * (radius(types[j]) + radius(types[i])))
          placed = false;
      }
      if (placed) x.coords[i] = c;
    }
    if (!placed) return std::nullopt;
  }
  return x;
}

constexpr std::array<const char *, 5> kBackbone = {"N", "C", "C", "O", "C"};

void add_pocket(ComplexRecord &rec, const MockConfig &cfg, num::Rng &rng) {
  const std::size_t target =
      cfg.pocket_min + rng.uniform_int(cfg.pocket_max - cfg.pocket_min + 1);
  const auto &lig = rec.pose.coords;
  std::vector<Vec3> placed;
  int residue_id = 1;
  std::size_t budget = 0;
  while (placed.size() < target) {
    const std::string res(chem::ResidueVocab::kNames[rng.uniform_int(20)]);
    const std::size_t atoms = 3 + rng.uniform_int(3);
    for (std::size_t a = 0; a < atoms && placed.size() < target; ++a) {
      for (;;) {
        if (++budget > cfg.rejection_budget * 10) throw DatasetError("mock pocket budget exhausted");
        const Vec3 &anchor = lig[rng.uniform_int(lig.size())];
        const Vec3 u = unit_vector(rng);
        const double r = rng.uniform(3.6, 6.0);
        const Vec3 c{anchor[0] + r * u[0], anchor[1] + r * u[1], anchor[2] + r * u[2]};
        bool ok = true;
        for (const auto &l : lig) ok = ok && chem::distance(c, l) >= 3.3;
        for (const auto &q : placed) ok = ok && chem::distance(c, q) >= 1.8;
        if (!ok) continue;
        placed.push_back(c);
        rec.protein.push_back({c, a == 4 && res == "CYS" ? "S" : kBackbone[std::min<std::size_t>(a, 4)],
                               res, residue_id, "A"});
        break;
      }
    }
    ++residue_id;
  }
  // A water near the ligand and one residue far outside the cutoff.
  const Vec3 &l0 = lig[0];
  const Vec3 u = unit_vector(rng);
  rec.protein.push_back({{l0[0] + 3.0 * u[0], l0[1] + 3.0 * u[1], l0[2] + 3.0 * u[2]}, "O",
                         "HOH", 900, "W"});
  double far = 0.0;
  for (const auto &l : lig) far = std::max(far, chem::distance(l, l0));
  const Vec3 v = unit_vector(rng);
  const double d = far + 15.0;
  for (int k = 0; k < 4; ++k)
    rec.protein.push_back({{l0[0] + (d + k) * v[0], l0[1] + (d + k) * v[1], l0[2] + (d + k) * v[2]},
                           kBackbone[k], "GLY", residue_id, "A"});
}

}  // namespace

std::vector<ComplexRecord> mock_records(const MockConfig &cfg, num::Rng &rng) {
  if (cfg.ligands < 1 || cfg.targets < 1) throw DatasetError("mock counts must be >= 1");
  if (cfg.min_atoms < 2 || cfg.max_atoms < cfg.min_atoms)
    throw DatasetError("mock atom range invalid");
  if (cfg.pocket_min < 1 || cfg.pocket_max < cfg.pocket_min)
    throw DatasetError("mock pocket range invalid");

  std::vector<ComplexRecord> out;
  std::vector<chem::LigandGraph> used;
  for (std::size_t l = 0; l < cfg.ligands; ++l) {
    // Ligands must be pairwise non-isomorphic or the planted counts break.
    std::optional<Template> pick;
    for (std::size_t attempt = 0; attempt < cfg.rejection_budget && !pick; ++attempt) {
      const std::size_t n = cfg.min_atoms + rng.uniform_int(cfg.max_atoms - cfg.min_atoms + 1);
      Template cand = random_template(n, rng, cfg.rejection_budget);
      bool fresh = true;
      for (const auto &g : used) fresh = fresh && !chem::graphs_isomorphic(g, cand.graph);
      if (fresh) pick = std::move(cand);
    }
    if (!pick) throw DatasetError("could not draw enough distinct mock ligands");
    const Template &tp = *pick;
    const std::size_t n = tp.graph.n_atoms();
    used.push_back(tp.graph);
    std::vector<std::size_t> occurrences;
    for (std::size_t t = 0; t < cfg.targets; ++t) occurrences.push_back(t);
    for (std::size_t r = 0; r < cfg.same_target_repeats; ++r)
      occurrences.push_back(rng.uniform_int(cfg.targets));

    for (std::size_t k = 0; k < occurrences.size(); ++k) {
      std::optional<chem::Pose> conf;
      for (std::size_t attempt = 0; attempt < cfg.rejection_budget && !conf; ++attempt) {
        conf = embed(tp, rng);
        if (conf && !chem::validate_assembly(tp.graph, *conf).valid) conf.reset();
      }
      if (!conf) throw DatasetError("mock conformer rejection budget exhausted");

      ComplexRecord rec;
      rec.id = "L" + std::to_string(l) + "_T" + std::to_string(occurrences[k]) + "_" +
               std::to_string(k);
      rec.target = "T" + std::to_string(occurrences[k]);
      const Mat3 rot = random_rotation(rng);
      const Vec3 shift{rng.uniform(-20, 20), rng.uniform(-20, 20), rng.uniform(-20, 20)};
      // Relabel atoms so repeated occurrences do not share an atom order.
      std::vector<std::size_t> perm(n);
      for (std::size_t i = 0; i < n; ++i) perm[i] = i;
      for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.uniform_int(i)]);
      rec.ligand = tp.graph.permuted(perm);
      chem::Pose moved;
      moved.coords.resize(n);
      for (std::size_t i = 0; i < n; ++i) moved.coords[i] = apply(rot, conf->coords[i], shift);
      rec.pose = moved.permuted(perm);
      add_pocket(rec, cfg, rng);
      out.push_back(std::move(rec));
    }
  }
  return out;
}

std::size_t expected_mock_pairs(const MockConfig &cfg) {
  return cfg.ligands * (cfg.targets * (cfg.targets - 1) / 2);
}

}  // namespace dualfuse::data
