//
// Project dualfuse - Copyright 2026 The dualfuse Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <sstream>

#include "dualfuse/chem/io.hpp"
#include "dualfuse/chem/isomorphism.hpp"
#include "dualfuse/chem/molecule.hpp"
#include "dualfuse/chem/validity.hpp"
#include "dualfuse/numerics/rng.hpp"

using namespace dualfuse::chem;
using dualfuse::num::Rng;

namespace {

constexpr std::size_t C = 0, N = 1, O = 2;

LigandGraph chain(std::vector<std::size_t> types, BondType b = BondType::kSingle) {
  LigandGraph g(std::move(types));
  for (std::size_t i = 0; i + 1 < g.n_atoms(); ++i) g.set_bond(i, i + 1, b);
  return g;
}

std::vector<std::size_t> random_perm(std::size_t n, Rng &rng) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) std::swap(p[i - 1], p[rng.uniform_int(i)]);
  return p;
}

LigandGraph random_graph(std::size_t n, Rng &rng, double bond_p = 0.3) {
  std::vector<std::size_t> types(n);
  for (auto &t : types) t = rng.uniform_int(3);
  LigandGraph g(types);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (rng.bernoulli(bond_p)) g.set_bond(i, j, static_cast<BondType>(1 + rng.uniform_int(4)));
  return g;
}

// Exhaustive oracle: does any permutation carry g1 onto g2?
bool brute_force_isomorphic(const LigandGraph &g1, const LigandGraph &g2) {
  if (g1.n_atoms() != g2.n_atoms()) return false;
  const std::size_t n = g1.n_atoms();
  std::vector<std::size_t> m(n);
  std::iota(m.begin(), m.end(), std::size_t{0});
  do {
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) ok = g1.atom_type(i) == g2.atom_type(m[i]);
    for (std::size_t i = 0; i < n && ok; ++i)
      for (std::size_t j = i + 1; j < n && ok; ++j) ok = g1.bond(i, j) == g2.bond(m[i], m[j]);
    if (ok) return true;
  } while (std::next_permutation(m.begin(), m.end()));
  return false;
}

bool mapping_valid(const LigandGraph &g1, const LigandGraph &g2, const std::vector<std::size_t> &m) {
  for (std::size_t i = 0; i < g1.n_atoms(); ++i)
    if (g1.atom_type(i) != g2.atom_type(m[i])) return false;
  for (std::size_t i = 0; i < g1.n_atoms(); ++i)
    for (std::size_t j = i + 1; j < g1.n_atoms(); ++j)
      if (g1.bond(i, j) != g2.bond(m[i], m[j])) return false;
  return true;
}

}  // namespace

TEST_CASE("pair indexing is a bijection onto the upper triangle") {
  const std::size_t n = 7;
  std::vector<int> hit(pair_count(n), 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      ++hit[pair_index(i, j, n)];
      CHECK(pair_index(i, j, n) == pair_index(j, i, n));
    }
  CHECK(std::all_of(hit.begin(), hit.end(), [](int h) { return h == 1; }));
  CHECK_THROWS_AS(pair_index(2, 2, n), ChemError);
}

TEST_CASE("canonical_hash") {
  SUBCASE("single atom") {
    LigandGraph g({C});
    std::vector<std::size_t> id{0};
    CHECK(canonical_hash(g) == canonical_hash(g.permuted(id)));
  }
  SUBCASE("ethanol under reorderings, distinct from dimethyl ether") {
    LigandGraph ethanol = chain({C, C, O});
    LigandGraph ether = chain({C, O, C});
    std::vector<std::size_t> p1{2, 0, 1}, p2{1, 2, 0};
    auto e1 = ethanol.permuted(p1), e2 = ethanol.permuted(p2);
    REQUIRE(brute_force_isomorphic(e1, e2));
    CHECK(canonical_hash(e1) == canonical_hash(e2));
    REQUIRE_FALSE(brute_force_isomorphic(ethanol, ether));
    CHECK(canonical_hash(ethanol) != canonical_hash(ether));
  }
  SUBCASE("invariant under random permutations of random graphs") {
    Rng rng(7);
    for (int trial = 0; trial < 1000; ++trial) {
      const std::size_t n = 1 + rng.uniform_int(12);
      auto g = random_graph(n, rng);
      auto p = random_perm(n, rng);
      CHECK(canonical_hash(g) == canonical_hash(g.permuted(p)));
    }
  }
}

TEST_CASE("graphs_isomorphic") {
  SUBCASE("identity") {
    auto g = chain({C, N, O, C});
    auto m = graphs_isomorphic(g, g);
    REQUIRE(m);
    CHECK(*m == std::vector<std::size_t>{0, 1, 2, 3});
  }
  SUBCASE("cyclopropane under rotation of labels") {
    LigandGraph ring({C, C, C});
    ring.set_bond(0, 1, BondType::kSingle);
    ring.set_bond(1, 2, BondType::kSingle);
    ring.set_bond(0, 2, BondType::kSingle);
    std::vector<std::size_t> rot{1, 2, 0};
    auto rotated = ring.permuted(rot);
    auto m = graphs_isomorphic(ring, rotated);
    REQUIRE(m);
    CHECK(mapping_valid(ring, rotated, *m));
    // All 3! assignments are automorphisms of the triangle; the smallest is the identity.
    CHECK(*m == std::vector<std::size_t>{0, 1, 2});
  }
  SUBCASE("linear C3 vs ring") {
    LigandGraph ring({C, C, C});
    ring.set_bond(0, 1, BondType::kSingle);
    ring.set_bond(1, 2, BondType::kSingle);
    ring.set_bond(0, 2, BondType::kSingle);
    CHECK_FALSE(graphs_isomorphic(chain({C, C, C}), ring));
  }
  SUBCASE("returned mapping is the lexicographically smallest") {
    auto g = chain({C, C, O});
    std::vector<std::size_t> p{2, 1, 0};
    auto h = g.permuted(p);  // O-C-C
    auto m = graphs_isomorphic(g, h);
    REQUIRE(m);
    CHECK(*m == std::vector<std::size_t>{2, 1, 0});
  }
  SUBCASE("sound and complete against brute force for up to 8 atoms") {
    Rng rng(99);
    for (int trial = 0; trial < 300; ++trial) {
      const std::size_t n = 1 + rng.uniform_int(8);
      auto g1 = random_graph(n, rng, 0.35);
      LigandGraph g2 = g1.permuted(random_perm(n, rng));
      if (rng.bernoulli(0.5) && n > 1) {
        // Perturb one pair so some trials are non-isomorphic.
        const std::size_t i = rng.uniform_int(n - 1);
        g2.set_bond(i, i + 1, g2.bond(i, i + 1) == BondType::kNone ? BondType::kDouble
                                                                    : BondType::kNone);
      }
      const bool truth = brute_force_isomorphic(g1, g2);
      auto m = graphs_isomorphic(g1, g2);
      CHECK(m.has_value() == truth);
      if (m) CHECK(mapping_valid(g1, g2, *m));
    }
  }
}

TEST_CASE("validate_assembly") {
  ValidityConfig cfg;
  SUBCASE("carbon with four single bonds") {
    LigandGraph g({C, C, C, C, C});
    for (std::size_t k = 1; k < 5; ++k) g.set_bond(0, k, BondType::kSingle);
    const double a = 1.52 / std::sqrt(3.0);
    Pose x{{{0, 0, 0}, {a, a, a}, {a, -a, -a}, {-a, a, -a}, {-a, -a, a}}};
    auto r = validate_assembly(g, x, cfg);
    CHECK(r.valence_ok[0]);
    CHECK(r.valid);
  }
  SUBCASE("carbon with five single bonds") {
    LigandGraph g({C, C, C, C, C, C});
    for (std::size_t k = 1; k < 6; ++k) g.set_bond(0, k, BondType::kSingle);
    Pose x{{{0, 0, 0}, {1.5, 0, 0}, {-1.5, 0, 0}, {0, 1.5, 0}, {0, -1.5, 0}, {0, 0, 1.5}}};
    auto r = validate_assembly(g, x, cfg);
    CHECK_FALSE(r.valence_ok[0]);
    CHECK_FALSE(r.valid);
  }
  SUBCASE("stretched C-C bond") {
    // window is [0.8, 1.25] x 1.52 = [1.216, 1.9]
    auto g = chain({C, C});
    auto r = validate_assembly(g, Pose{{{0, 0, 0}, {5.0, 0, 0}}}, cfg);
    REQUIRE(r.bond_length_ok.size() == 1);
    CHECK_FALSE(r.bond_length_ok[0]);
    CHECK(validate_assembly(g, Pose{{{0, 0, 0}, {1.9, 0, 0}}}, cfg).valid);
    CHECK_FALSE(validate_assembly(g, Pose{{{0, 0, 0}, {1.21, 0, 0}}}, cfg).valid);
  }
  SUBCASE("aromatic half orders round half up") {
    // Carbon with three aromatic bonds: 4.5 rounds to 5 > 4.
    LigandGraph g({C, C, C, C});
    for (std::size_t k = 1; k < 4; ++k) g.set_bond(0, k, BondType::kAromatic);
    Pose x{{{0, 0, 0}, {1.4, 0, 0}, {-0.7, 1.2, 0}, {-0.7, -1.2, 0}}};
    CHECK_FALSE(validate_assembly(g, x, cfg).valence_ok[0]);
    g.set_bond(0, 3, BondType::kNone);  // 3.0 -> fine, but atom 3 is now disconnected
    auto r = validate_assembly(g, x, cfg);
    CHECK(r.valence_ok[0]);
    CHECK_FALSE(r.connected_ok);
  }
  SUBCASE("single atom is connected") {
    CHECK(validate_assembly(LigandGraph({O}), Pose{{{1, 2, 3}}}, cfg).valid);
  }
  SUBCASE("size mismatch") {
    CHECK_THROWS_AS(validate_assembly(chain({C, C}), Pose{{{0, 0, 0}}}, cfg), ChemError);
  }
  SUBCASE("permutation invariance of the overall flag") {
    Rng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t n = 2 + rng.uniform_int(6);
      auto g = random_graph(n, rng, 0.4);
      Pose x;
      for (std::size_t i = 0; i < n; ++i)
        x.coords.push_back({rng.uniform(0, 3), rng.uniform(0, 3), rng.uniform(0, 3)});
      auto p = random_perm(n, rng);
      CHECK(validate_assembly(g, x, cfg).valid ==
            validate_assembly(g.permuted(p), x.permuted(p), cfg).valid);
    }
  }
}

TEST_CASE("infer_bonds") {
  ValidityConfig cfg;
  auto near = infer_bonds({C, C}, Pose{{{0, 0, 0}, {1.5, 0, 0}}}, cfg);
  REQUIRE(near.size() == 1);
  CHECK(near[0] == BondType::kSingle);  // 1.5 <= 1.15 * 1.52
  CHECK(infer_bonds({C, C}, Pose{{{0, 0, 0}, {3.0, 0, 0}}}, cfg)[0] == BondType::kNone);
  CHECK(infer_bonds({C}, Pose{{{0, 0, 0}}}, cfg).empty());
}

TEST_CASE("json and sdf output") {
  auto g = chain({C, N, O});
  g.set_bond(0, 1, BondType::kDouble);
  Pose x{{{0, 0, 0}, {1.3, 0, 0}, {2.0, 1.2, 0}}};
  auto back = ligand_from_json(ligand_to_json(g));
  CHECK(back == g);
  CHECK(pose_from_json(pose_to_json(x)) == x);

  Pocket p;
  p.id = "T1";
  p.coords = {{1, 2, 3}, {4, 5, 6}};
  p.elements = {0, 2};
  p.residues = {ResidueVocab::from_name("GLY"), ResidueVocab::from_name("SER")};
  p.residue_ids = {10, 11};
  auto pb = pocket_from_json(pocket_to_json(p));
  CHECK(pb.coords == p.coords);
  CHECK(pb.residues == p.residues);
  CHECK(p.features().rows() == 2);
  CHECK(p.features().cols() == Pocket::kFeatureDim);

  std::ostringstream os;
  write_dual_sdf(os, "mol-1", g, x, x, "T1", "T2");
  const std::string sdf = os.str();
  CHECK(sdf.find("  3  2  0  0  0  0  0  0  0  0999 V2000") != std::string::npos);
  CHECK(sdf.find("  1  2  2  0") != std::string::npos);
  CHECK(std::count(sdf.begin(), sdf.end(), '$') == 8);
  CHECK(sdf.rfind("mol-1\n", 0) == 0);
  CHECK_THROWS_AS(ligand_from_json(nlohmann::json::parse(R"({"atoms":["C","H"],"bonds":[]})")),
                  ChemError);
}
