//
// Project dualfuse - Copyright 2026 The dualfuse Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "dualfuse/dlcf/graph.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace dualfuse::dlcf {

std::vector<std::size_t> TargetGraph::neighbors(std::size_t local) const {
  std::vector<std::size_t> out;
  if (local < n_lig) {
    for (std::size_t v = 0; v < n_lig; ++v)
      if (v != local) out.push_back(v);
  }
  for (auto [u, w] : lig_pocket) {
    if (u == local) out.push_back(n_lig + w);
    if (n_lig + w == local) out.push_back(u);
  }
  for (auto [a, b] : pocket_pocket) {
    if (n_lig + a == local) out.push_back(n_lig + b);
    if (n_lig + b == local) out.push_back(n_lig + a);
  }
  std::sort(out.begin(), out.end());
  return out;
}

TargetGraph knn_graph(std::span<const chem::Vec3> ligand, std::span<const chem::Vec3> pocket,
                      std::size_t k) {
  const std::size_t n = ligand.size(), m = pocket.size(), total = n + m;
  if (k < 1) throw DlcfError("knn: k must be >= 1");
  if (k >= total)
    throw DlcfError("knn: k=" + std::to_string(k) + " must be below the node count " +
                    std::to_string(total));
  auto pos = [&](std::size_t i) -> const chem::Vec3 & { return i < n ? ligand[i] : pocket[i - n]; };
  for (std::size_t i = 0; i < total; ++i)
    for (double c : pos(i))
      if (!std::isfinite(c)) throw DlcfError("knn: non-finite coordinate");

  std::set<std::pair<std::size_t, std::size_t>> undirected;
  std::vector<std::pair<double, std::size_t>> cand;
  for (std::size_t u = 0; u < total; ++u) {
    cand.clear();
    for (std::size_t w = 0; w < total; ++w) {
      if (w == u || (u < n && w < n)) continue;
      const auto &a = pos(u), &b = pos(w);
      const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
      cand.emplace_back(dx * dx + dy * dy + dz * dz, w);
    }
    const std::size_t take = std::min(k, cand.size());
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(take), cand.end());
    for (std::size_t i = 0; i < take; ++i)
      undirected.emplace(std::min(u, cand[i].second), std::max(u, cand[i].second));
  }

  TargetGraph g;
  g.n_lig = n;
  g.n_pocket = m;
  for (auto [a, b] : undirected) {
    if (a < n) g.lig_pocket.emplace_back(a, b - n);
    else g.pocket_pocket.emplace_back(a - n, b - n);
  }
  return g;
}

std::size_t DualGraph::node_count() const {
  std::size_t c = n_lig;
  for (const auto &t : targets) c += t.n_pocket;
  return c;
}

std::vector<std::size_t> DualGraph::neighbors(std::size_t global) const {
  std::set<std::size_t> out;
  if (global < n_lig) {
    for (std::size_t k = 0; k < targets.size(); ++k)
      for (auto local : targets[k].neighbors(global))
        out.insert(local < n_lig ? local : offsets[k] + local - n_lig);
  } else {
    for (std::size_t k = 0; k < targets.size(); ++k) {
      if (global < offsets[k] || global >= offsets[k] + targets[k].n_pocket) continue;
      for (auto local : targets[k].neighbors(n_lig + global - offsets[k]))
        out.insert(local < n_lig ? local : offsets[k] + local - n_lig);
    }
  }
  return {out.begin(), out.end()};
}

DualGraph fuse_k_targets(std::vector<TargetGraph> graphs) {
  if (graphs.empty()) throw DlcfError("fuse: no target graphs");
  DualGraph d;
  d.n_lig = graphs.front().n_lig;
  std::size_t off = d.n_lig;
  for (const auto &g : graphs) {
    if (g.n_lig != d.n_lig) throw DlcfError("fuse: inconsistent ligand sizes across targets");
    d.offsets.push_back(off);
    off += g.n_pocket;
  }
  d.targets = std::move(graphs);
  for (std::size_t u = 0; u < d.n_lig; ++u)
    for (std::size_t v = 0; v < d.n_lig; ++v)
      if (u != v) {
        d.ll_dst.push_back(u);
        d.ll_src.push_back(v);
      }
  return d;
}

DualGraph build_dual_graph(std::span<const chem::Vec3> x1, std::span<const chem::Vec3> x2,
                           const chem::Pocket &p1, const chem::Pocket &p2, std::size_t k) {
  return fuse_k_targets({knn_graph(x1, p1.coords, k), knn_graph(x2, p2.coords, k)});
}

}  // namespace dualfuse::dlcf
