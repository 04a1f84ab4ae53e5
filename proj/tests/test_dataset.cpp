//
// Project dualfuse - Copyright 2026 The dualfuse Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <set>

#include "dualfuse/chem/isomorphism.hpp"
#include "dualfuse/chem/validity.hpp"
#include "dualfuse/dataset.hpp"
#include "dualfuse/numerics/rng.hpp"

using namespace dualfuse;
using namespace dualfuse::data;

namespace {

// Ethanol-like C-C-O with a residue placed at a controlled minimum distance.
ComplexRecord small_record(const std::string &id, const std::string &target,
                           std::vector<double> residue_min_dists) {
  ComplexRecord r;
  r.id = id;
  r.target = target;
  r.ligand = chem::LigandGraph({0, 0, 2});
  r.ligand.set_bond(0, 1, chem::BondType::kSingle);
  r.ligand.set_bond(1, 2, chem::BondType::kSingle);
  r.pose.coords = {{0, 0, 0}, {1.52, 0, 0}, {2.1, 1.3, 0}};
  int rid = 1;
  for (double d : residue_min_dists) {
    // Nearest ligand atom is atom 0 at the origin; the residue extends away.
    r.protein.push_back({{-d, 0, 0}, "N", "ALA", rid, "A"});
    r.protein.push_back({{-d - 1.4, 0.3, 0}, "C", "ALA", rid, "A"});
    r.protein.push_back({{-d - 2.0, 1.5, 0}, "O", "ALA", rid, "A"});
    ++rid;
  }
  return r;
}

std::set<std::string> instance_ids(const std::vector<DualInstance> &v) {
  std::set<std::string> s;
  for (const auto &d : v) s.insert(d.id);
  return s;
}

void reverify(const DualInstance &d, const std::vector<ComplexRecord> &records) {
  auto find = [&](const std::string &id) -> const ComplexRecord & {
    for (const auto &r : records)
      if (r.id == id) return r;
    FAIL("missing source record " << id);
    return records.front();
  };
  const auto &a = find(d.sources[0]);
  const auto &b = find(d.sources[1]);
  auto map = chem::graphs_isomorphic(a.ligand, b.ligand);
  REQUIRE(map.has_value());
  CHECK(pockets_distinct(d.p1, d.p2));
  CHECK(d.graph == a.ligand);
  // Pose 2 rows follow pose 1 atom order: interatomic distances must agree
  // with the source pose under the isomorphism.
  for (std::size_t i = 0; i < d.graph.n_atoms(); ++i)
    for (std::size_t j = 0; j < d.graph.n_atoms(); ++j)
      CHECK(chem::distance(d.x2.coords[i], d.x2.coords[j]) ==
            doctest::Approx(chem::distance(b.pose.coords[(*map)[i]], b.pose.coords[(*map)[j]])));
  for (const auto &e : d.graph.edges())
    CHECK(b.ligand.bond((*map)[e.i], (*map)[e.j]) == e.type);
}

}  // namespace

TEST_CASE("extract_pocket: closed cutoff and residue granularity") {
  auto r = small_record("r", "T1", {4.0, 12.0});
  auto p = extract_pocket(r);
  CHECK(p.size() == 3);
  for (int id : p.residue_ids) CHECK(id == 1);
  CHECK(p.id == "T1");

  auto edge = small_record("r", "T1", {10.0});
  CHECK(extract_pocket(edge).size() == 3);
  auto beyond = small_record("r", "T1", {10.0 + 1e-9});
  CHECK_THROWS_AS(extract_pocket(beyond), EmptyPocketError);

  auto water = small_record("r", "T1", {});
  water.protein.push_back({{0, 3, 0}, "O", "HOH", 5, "W"});
  CHECK_THROWS_AS(extract_pocket(water), EmptyPocketError);

  auto hyd = small_record("r", "T1", {4.0});
  hyd.protein.push_back({{-4.0, -1.0, 0}, "H", "ALA", 1, "A"});
  CHECK(extract_pocket(hyd).size() == 3);

  auto nolig = small_record("r", "T1", {4.0});
  nolig.pose.coords.clear();
  CHECK_THROWS_AS(extract_pocket(nolig), DatasetError);
}

TEST_CASE("pockets_distinct is decided by identifier") {
  auto p = extract_pocket(small_record("r", "T1", {4.0}));
  auto q = p;
  CHECK_FALSE(pockets_distinct(p, q));
  q.id = "T2";
  CHECK(pockets_distinct(p, q));
  q.coords[0][0] += 5.0;
  CHECK(pockets_distinct(p, q));
}

TEST_CASE("derive_pairs: counting rules") {
  SUBCASE("three targets give C(3,2) instances") {
    std::vector<ComplexRecord> recs{small_record("a", "T1", {4}), small_record("b", "T2", {4}),
                                    small_record("c", "T3", {4})};
    auto d = derive_pairs(recs);
    CHECK(d.instances.size() == 3);
    CHECK(d.report.multi_target_ligands == 1);
    for (const auto &i : d.instances) reverify(i, recs);
  }
  SUBCASE("repeat under one target is collapsed") {
    std::vector<ComplexRecord> recs{small_record("a", "T1", {4}), small_record("a2", "T1", {5}),
                                    small_record("b", "T2", {4})};
    auto d = derive_pairs(recs);
    REQUIRE(d.instances.size() == 1);
    CHECK(d.instances[0].sources[0] == "a");
    CHECK(d.report.repeated_occurrences == 1);
  }
  SUBCASE("same target only") {
    std::vector<ComplexRecord> recs{small_record("a", "T1", {4}), small_record("b", "T1", {4})};
    CHECK(derive_pairs(recs).instances.empty());
  }
  SUBCASE("malformed rows are reported and skipped") {
    std::vector<nlohmann::json> rows{record_to_json(small_record("a", "T1", {4})),
                                     nlohmann::json{{"id", "broken"}},
                                     record_to_json(small_record("b", "T2", {4}))};
    auto d = derive_pairs(rows);
    CHECK(d.instances.size() == 1);
    CHECK(d.report.parse_errors == 1);
    CHECK(d.report.records_read == 3);
  }
}

TEST_CASE("mock data: planted repeats give the combinatorial count") {
  num::Rng rng(7);
  MockConfig cfg;
  cfg.ligands = 5;
  cfg.targets = 3;
  auto recs = mock_records(cfg, rng);
  CHECK(recs.size() == 15);
  for (const auto &r : recs) {
    CHECK(chem::validate_assembly(r.ligand, r.pose).valid);
    const auto p = extract_pocket(r);
    CHECK(p.size() >= cfg.pocket_min);
    CHECK(p.size() <= cfg.pocket_max);
  }
  auto d = derive_pairs(recs);
  CHECK(d.instances.size() == expected_mock_pairs(cfg));
  CHECK(d.instances.size() == 15);
  for (const auto &i : d.instances) reverify(i, recs);

  SUBCASE("input order changes representatives, not counts") {
    auto shuffled = recs;
    num::Rng r2(1);
    for (std::size_t i = shuffled.size(); i > 1; --i)
      std::swap(shuffled[i - 1], shuffled[r2.uniform_int(i)]);
    CHECK(derive_pairs(shuffled).instances.size() == 15);
  }
  SUBCASE("idempotent on its own source records") {
    std::set<std::string> used;
    for (const auto &i : d.instances) used.insert(i.sources.begin(), i.sources.end());
    std::vector<ComplexRecord> again;
    for (const auto &r : recs)
      if (used.count(r.id)) again.push_back(r);
    CHECK(instance_ids(derive_pairs(again).instances) == instance_ids(d.instances));
  }
  SUBCASE("same-target repeats do not add instances") {
    MockConfig c2 = cfg;
    c2.same_target_repeats = 2;
    num::Rng r3(11);
    auto recs2 = mock_records(c2, r3);
    CHECK(recs2.size() == 25);
    auto d2 = derive_pairs(recs2);
    CHECK(d2.instances.size() == 15);
    CHECK(d2.report.repeated_occurrences == 10);
  }
}

TEST_CASE("mock data: single ligand single target, determinism") {
  MockConfig cfg;
  cfg.ligands = 1;
  cfg.targets = 1;
  num::Rng rng(3);
  CHECK(derive_pairs(mock_records(cfg, rng)).instances.empty());
  cfg.ligands = 4;
  num::Rng a(5), b(5);
  auto ra = mock_records(cfg, a), rb = mock_records(cfg, b);
  REQUIRE(ra.size() == rb.size());
  for (std::size_t i = 0; i < ra.size(); ++i) CHECK(record_to_json(ra[i]) == record_to_json(rb[i]));
  cfg.ligands = 0;
  CHECK_THROWS_AS(mock_records(cfg, a), DatasetError);
}

TEST_CASE("instance JSON-Lines round trip") {
  num::Rng rng(9);
  MockConfig cfg;
  cfg.ligands = 2;
  cfg.targets = 2;
  auto d = derive_pairs(mock_records(cfg, rng));
  const auto path = std::filesystem::temp_directory_path() / "dualfuse_instances_test.jsonl";
  write_instances(path, d.instances);
  auto back = read_instances(path);
  REQUIRE(back.size() == d.instances.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].graph == d.instances[i].graph);
    CHECK(back[i].x2 == d.instances[i].x2);
    CHECK(back[i].p1.coords == d.instances[i].p1.coords);
    CHECK(back[i].sources == d.instances[i].sources);
  }
  std::filesystem::remove(path);
}
