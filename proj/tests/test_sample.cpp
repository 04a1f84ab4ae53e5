//
// Project dualfuse - Copyright 2026 The dualfuse Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <doctest.h>

#include <cmath>

#include "dlcf_fixtures.hpp"
#include "dualfuse/chem/validity.hpp"
#include "dualfuse/sample.hpp"
#include "dualfuse/train.hpp"

using namespace dualfuse;
using namespace fixtures;
using num::Tensor;

namespace {

Tensor simplex_rows(std::size_t rows, std::size_t K, num::Rng &rng) {
  Tensor t = Tensor::matrix(rows, K);
  for (std::size_t r = 0; r < rows; ++r) {
    double z = 0.0;
    for (std::size_t j = 0; j < K; ++j) z += (t(r, j) = rng.uniform(0.05, 1.0));
    for (std::size_t j = 0; j < K; ++j) t(r, j) /= z;
  }
  return t;
}

dlcf::DenoiserOutput random_prediction(const sched::NoisyState &s, num::Rng &rng) {
  dlcf::DenoiserOutput p;
  for (const auto &pose : s.poses) {
    chem::Pose q = pose;
    for (auto &x : q.coords)
      for (auto &c : x) c += rng.normal();
    p.x.push_back(q);
  }
  p.atom_probs = simplex_rows(s.n_atoms(), chem::AtomVocab::kSize, rng);
  p.bond_probs = simplex_rows(chem::pair_count(s.n_atoms()), chem::BondVocab::kSize, rng);
  return p;
}

train::Checkpoint tiny_checkpoint(bool no_bond, bool no_dlcf, std::uint64_t seed = 1) {
  train::TrainConfig c;
  c.steps = 2;
  c.diffusion_steps = 8;
  c.model = tiny_config(no_dlcf ? 1 : 2);
  c.no_bond_gen = no_bond;
  c.no_dlcf = no_dlcf;
  c.seed = seed;
  return train::fit(mock_instances(2, 2, 21), c).checkpoint;
}

}  // namespace

TEST_CASE("reverse_step: t = 1 is deterministic in positions and follows one-hot predictions") {
  auto sched = sched::NoiseSchedule::make(20);
  num::Rng rng(1);
  auto s = random_state(5, 2, 1, rng);
  auto pred = random_prediction(s, rng);
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < chem::AtomVocab::kSize; ++j) pred.atom_probs(i, j) = 0.0;
    pred.atom_probs(i, (i * 3) % chem::AtomVocab::kSize) = 1.0;
  }
  for (int rep = 0; rep < 50; ++rep) {
    auto next = sample::reverse_step(s, pred, sched, rng);
    CHECK(next.t == 0);
    CHECK(next.poses[0] == pred.x[0]);
    CHECK(next.poses[1] == pred.x[1]);
    for (std::size_t i = 0; i < 5; ++i) CHECK(next.graph.atom_type(i) == (i * 3) % chem::AtomVocab::kSize);
  }
  auto zero = s;
  zero.t = 0;
  CHECK_THROWS_AS(sample::reverse_step(zero, pred, sched, rng), sample::SampleError);
}

TEST_CASE("reverse_step: category frequencies match the posterior (multinomial 3 sigma)") {
  auto sched = sched::NoiseSchedule::make(40);
  num::Rng rng(2);
  auto s = random_state(3, 2, 10, rng);
  s.graph.set_bond(0, 1, chem::BondType::kNone);
  auto pred = random_prediction(s, rng);
  const auto pa = sched::categorical_posterior(s.graph.atom_type(0),
                                               {pred.atom_probs.row(0).begin(), pred.atom_probs.row(0).end()},
                                               10, sched::Channel::kAtom, sched);
  const auto pb = sched::categorical_posterior(0, {pred.bond_probs.row(0).begin(), pred.bond_probs.row(0).end()},
                                               10, sched::Channel::kBond, sched);
  const int N = 10000;
  std::vector<int> ca(chem::AtomVocab::kSize), cb(chem::BondVocab::kSize);
  for (int i = 0; i < N; ++i) {
    auto next = sample::reverse_step(s, pred, sched, rng);
    ++ca[next.graph.atom_type(0)];
    ++cb[static_cast<std::size_t>(next.graph.bond(0, 1))];
  }
  auto within = [&](const std::vector<int> &counts, const std::vector<double> &p) {
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double sd = std::sqrt(N * p[j] * (1 - p[j]));
      INFO("category " << j << " count " << counts[j] << " expect " << N * p[j]);
      CHECK(std::abs(counts[j] - N * p[j]) <= 3.0 * sd + 1e-9);
    }
  };
  within(ca, pa);
  within(cb, pb);
}

TEST_CASE("reverse_step: swapping poses and noise streams swaps the result") {
  auto sched = sched::NoiseSchedule::make(20);
  num::Rng rng(3);
  auto s = random_state(4, 2, 9, rng);
  auto pred = random_prediction(s, rng);
  num::Rng r1(55), r2(55);
  auto a = sample::reverse_step(s, pred, sched, r1);
  auto sw = s;
  std::swap(sw.poses[0], sw.poses[1]);
  auto psw = pred;
  std::swap(psw.x[0], psw.x[1]);
  auto b = sample::reverse_step(sw, psw, sched, r2, true, {1, 0});
  CHECK(a.poses[0] == b.poses[1]);
  CHECK(a.poses[1] == b.poses[0]);
  CHECK(a.graph == b.graph);
}

TEST_CASE("draw_n_atoms follows the histogram") {
  num::Rng rng(4);
  std::map<std::size_t, std::size_t> h{{5, 1}, {9, 3}};
  int nine = 0;
  for (int i = 0; i < 4000; ++i) {
    auto n = sample::draw_n_atoms(h, rng);
    CHECK((n == 5 || n == 9));
    nine += n == 9;
  }
  CHECK(std::abs(nine - 3000) < 3 * std::sqrt(4000 * 0.75 * 0.25));
  CHECK_THROWS_AS(sample::draw_n_atoms({}, rng), sample::SampleError);
}

TEST_CASE("generate: determinism, fixed size, frames, contracts") {
  auto ck = tiny_checkpoint(false, false);
  auto insts = mock_instances(1, 2, 22);
  const auto &p1 = insts[0].p1, &p2 = insts[0].p2;
  sample::SampleConfig cfg;
  cfg.count = 3;
  cfg.seed = 9;
  auto a = sample::generate(p1, p2, ck, cfg);
  auto b = sample::generate(p1, p2, ck, cfg);
  REQUIRE(a.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(a[i].graph == b[i].graph);
    CHECK(a[i].pose1 == b[i].pose1);
    CHECK(a[i].pose2 == b[i].pose2);
    CHECK(ck.n_atoms_histogram.contains(a[i].graph.n_atoms()));
  }

  cfg.n_atoms = 9;
  for (const auto &s : sample::generate(p1, p2, ck, cfg)) {
    CHECK(s.graph.n_atoms() == 9);
    CHECK(s.pose1.size() == 9);
    CHECK(s.pose2.size() == 9);
  }

  // Output frames follow the input pockets.
  cfg.n_atoms = 5;
  cfg.count = 1;
  const chem::Vec3 v{7.0, -2.0, 3.5};
  auto base = sample::generate(p1, p2, ck, cfg);
  auto moved = sample::generate(p1.translated(v), p2, ck, cfg);
  CHECK(moved[0].graph == base[0].graph);
  for (std::size_t i = 0; i < 5; ++i)
    for (int d = 0; d < 3; ++d) CHECK(std::abs(moved[0].pose1.coords[i][d] - base[0].pose1.coords[i][d] - v[d]) < 1e-9);
  CHECK(max_abs(moved[0].pose2.coords, base[0].pose2.coords) < 1e-9);

  auto bad = cfg;
  bad.steps = 50;
  CHECK_THROWS_AS(sample::generate(p1, p2, ck, bad), sample::SampleError);
  auto wrong_mode = cfg;
  wrong_mode.mode = sample::Mode::kSequential;
  CHECK_THROWS_AS(sample::generate(p1, p2, ck, wrong_mode), sample::SampleError);
  auto zero = cfg;
  zero.count = 0;
  CHECK_THROWS_AS(sample::generate(p1, p2, ck, zero), sample::SampleError);
  CHECK_THROWS_AS(sample::mode_from_string("fast"), sample::SampleError);
}

TEST_CASE("generate: swapping pockets with mirrored streams swaps the poses") {
  auto ck = tiny_checkpoint(false, false, 5);
  auto insts = mock_instances(1, 2, 23);
  const auto &p1 = insts[0].p1, &p2 = insts[0].p2;
  sample::SampleConfig cfg;
  cfg.count = 3;
  cfg.seed = 17;
  auto a = sample::generate(p1, p2, ck, cfg);
  cfg.mirror_streams = true;
  auto b = sample::generate(p2, p1, ck, cfg);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].graph == b[i].graph);
    CHECK(max_abs(a[i].pose1.coords, b[i].pose2.coords) < 1e-6);
    CHECK(max_abs(a[i].pose2.coords, b[i].pose1.coords) < 1e-6);
  }
}

TEST_CASE("generate: ablation modes") {
  auto insts = mock_instances(1, 2, 24);
  const auto &p1 = insts[0].p1, &p2 = insts[0].p2;
  sample::SampleConfig cfg;
  cfg.count = 2;
  cfg.n_atoms = 6;

  auto nb = tiny_checkpoint(true, false);
  cfg.mode = sample::Mode::kNoBondGen;
  for (const auto &s : sample::generate(p1, p2, nb, cfg)) {
    // Bonds are exactly those read off pose 1.
    CHECK(s.graph.pair_bonds() == chem::infer_bonds(s.graph.atom_types(), s.pose1));
  }

  auto seq = tiny_checkpoint(false, true);
  cfg.mode = sample::Mode::kSequential;
  auto out = sample::generate(p1, p2, seq, cfg);
  CHECK(out.size() == 2);
  CHECK(out[0].pose2.size() == 6);

  cfg.mode = sample::Mode::kFull;
  CHECK_THROWS_AS(sample::generate(p1, p2, seq, cfg), sample::SampleError);
}

TEST_CASE("sample JSON round trip") {
  auto ck = tiny_checkpoint(false, false);
  auto insts = mock_instances(1, 2, 25);
  sample::SampleConfig cfg;
  cfg.n_atoms = 4;
  auto s = sample::generate(insts[0].p1, insts[0].p2, ck, cfg).at(0);
  auto j = sample::sample_to_json(s, "A", "B", sample::Mode::kFull);
  auto back = sample::sample_from_json(j);
  CHECK(back.graph == s.graph);
  CHECK(back.pose1 == s.pose1);
  CHECK(back.pose2 == s.pose2);
  j["pose2"] = nlohmann::json::array();
  CHECK_THROWS_AS(sample::sample_from_json(j), sample::SampleError);
}
