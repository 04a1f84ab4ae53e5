//
// Project dualfuse - Copyright 2026 The dualfuse Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "dualfuse/chem/molecule.hpp"
#include "dualfuse/dataset.hpp"
#include "dualfuse/dlcf/model.hpp"
#include "dualfuse/numerics/rng.hpp"
#include "dualfuse/schedule.hpp"

namespace fixtures {

using namespace dualfuse;
using Mat3 = std::array<std::array<double, 3>, 3>;

inline dlcf::ModelConfig tiny_config(std::size_t targets = 2) {
  dlcf::ModelConfig c;
  c.node_dim = 8;
  c.edge_dim = 6;
  c.hidden = 8;
  c.layers = 2;
  c.knn = 4;
  c.time_dim = 6;
  c.rbf = 5;
  c.targets = targets;
  return c;
}

inline chem::Pocket random_pocket(const std::string &id, std::size_t m, num::Rng &rng) {
  chem::Pocket p;
  p.id = id;
  for (std::size_t i = 0; i < m; ++i) {
    chem::Vec3 d{rng.normal(), rng.normal(), rng.normal()};
    const double norm = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
    const double r = rng.uniform(3.0, 6.0);
    p.coords.push_back({d[0] / norm * r, d[1] / norm * r, d[2] / norm * r});
    p.elements.push_back(rng.uniform_int(4));
    p.residues.push_back(rng.uniform_int(20));
    p.residue_ids.push_back(static_cast<int>(i / 4));
  }
  return p;
}

inline sched::NoisyState random_state(std::size_t n, std::size_t targets, std::size_t t,
                                      num::Rng &rng) {
  std::vector<std::size_t> types(n);
  for (auto &v : types) v = rng.uniform_int(chem::AtomVocab::kSize);
  chem::LigandGraph g(types);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (rng.bernoulli(0.3)) g.set_bond(i, j, static_cast<chem::BondType>(rng.uniform_int(5)));
  sched::NoisyState s{g, {}, t};
  for (std::size_t k = 0; k < targets; ++k) {
    chem::Pose p;
    for (std::size_t i = 0; i < n; ++i)
      p.coords.push_back({1.5 * rng.normal(), 1.5 * rng.normal(), 1.5 * rng.normal()});
    s.poses.push_back(p);
  }
  return s;
}

inline Mat3 random_rotation(num::Rng &rng) {
  double q[4], n = 0.0;
  for (auto &x : q) {
    x = rng.normal();
    n += x * x;
  }
  n = std::sqrt(n);
  const double w = q[0] / n, x = q[1] / n, y = q[2] / n, z = q[3] / n;
  return {{{1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)},
           {2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)},
           {2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)}}};
}

inline chem::Vec3 rotate(const Mat3 &r, const chem::Vec3 &v, const chem::Vec3 &shift = {0, 0, 0}) {
  chem::Vec3 o{};
  for (int i = 0; i < 3; ++i) o[i] = r[i][0] * v[0] + r[i][1] * v[1] + r[i][2] * v[2] + shift[i];
  return o;
}

inline void rotate_all(std::vector<chem::Vec3> &pts, const Mat3 &r, const chem::Vec3 &shift = {0, 0, 0}) {
  for (auto &p : pts) p = rotate(r, p, shift);
}

inline double max_abs(const std::vector<chem::Vec3> &a, const std::vector<chem::Vec3> &b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (int d = 0; d < 3; ++d) m = std::max(m, std::abs(a[i][d] - b[i][d]));
  return m;
}

/// Dual instances derived from a small mock corpus.
inline std::vector<data::DualInstance> mock_instances(std::size_t ligands, std::size_t targets,
                                                      std::uint64_t seed, std::size_t pocket_atoms = 16) {
  data::MockConfig cfg;
  cfg.ligands = ligands;
  cfg.targets = targets;
  cfg.min_atoms = 5;
  cfg.max_atoms = 7;
  cfg.pocket_min = pocket_atoms;
  cfg.pocket_max = pocket_atoms;
  num::Rng rng(seed);
  return data::derive_pairs(data::mock_records(cfg, rng)).instances;
}

}  // namespace fixtures
