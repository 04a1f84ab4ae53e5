//
// Project dualfuse - Copyright 2026 The dualfuse Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "dualfuse/dlcf/model.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <set>
#include <string>

namespace dualfuse::dlcf {

using num::Tape;
using num::Tensor;
using num::Var;
using nlohmann::json;

// ---- configuration ------------------------------------------------------------

void ModelConfig::validate() const {
  if (node_dim == 0 || edge_dim == 0 || hidden == 0 || layers == 0)
    throw DlcfError("model dimensions and layer count must be positive");
  if (knn == 0) throw DlcfError("knn must be >= 1");
  if (time_dim < 2 || time_dim % 2 != 0) throw DlcfError("time_dim must be even and >= 2");
  if (rbf < 2 || !(rbf_max > 0.0)) throw DlcfError("rbf basis needs >= 2 centers over a positive span");
  if (targets == 0) throw DlcfError("targets must be >= 1");
  if (!(coord_eps > 0.0)) throw DlcfError("coord_eps must be positive");
}

json ModelConfig::to_json() const {
  return {{"node_dim", node_dim}, {"edge_dim", edge_dim}, {"layers", layers},
          {"knn", knn},           {"time_dim", time_dim}, {"hidden", hidden},
          {"rbf", rbf},           {"rbf_max", rbf_max},   {"targets", targets},
          {"coord_eps", coord_eps}};
}

ModelConfig ModelConfig::from_json(const json &j) {
  ModelConfig c;
  c.node_dim = j.value("node_dim", c.node_dim);
  c.edge_dim = j.value("edge_dim", c.edge_dim);
  c.layers = j.value("layers", c.layers);
  c.knn = j.value("knn", c.knn);
  c.time_dim = j.value("time_dim", c.time_dim);
  c.hidden = j.value("hidden", c.hidden);
  c.rbf = j.value("rbf", c.rbf);
  c.rbf_max = j.value("rbf_max", c.rbf_max);
  c.targets = j.value("targets", c.targets);
  c.coord_eps = j.value("coord_eps", c.coord_eps);
  c.validate();
  return c;
}

double coord_gate(std::size_t t, std::size_t steps) {
  if (steps == 0 || t > steps) throw DlcfError("coord_gate: t outside [0, T]");
  return std::sin(0.5 * std::numbers::pi * static_cast<double>(t) / static_cast<double>(steps));
}

Tensor time_embedding(std::size_t t, std::size_t steps, std::size_t dim) {
  if (steps == 0 || t > steps) throw DlcfError("time_embedding: t outside [0, T]");
  // Positions on a 0..1000 scale so models trained at different T agree.
  const double pos = 1000.0 * static_cast<double>(t) / static_cast<double>(steps);
  Tensor out = Tensor::matrix(1, dim);
  const std::size_t half = dim / 2;
  for (std::size_t i = 0; i < half; ++i) {
    const double w = std::pow(10000.0, -static_cast<double>(i) / static_cast<double>(half));
    out(0, i) = std::sin(pos * w);
    out(0, half + i) = std::cos(pos * w);
  }
  return out;
}

Var symmetric_stats(Var distances) {
  const std::size_t K = distances.cols();
  if (K == 1) return distances;
  Var sorted = num::sort_rows(distances);
  std::vector<Var> cols{num::row_sum(sorted)};
  for (std::size_t i = 0; i < K; ++i)
    for (std::size_t j = i + 1; j < K; ++j)
      cols.push_back(num::sub(num::slice_cols(sorted, j, j + 1), num::slice_cols(sorted, i, i + 1)));
  return num::concat_cols(cols);
}

// ---- model --------------------------------------------------------------------

namespace {

std::size_t gap_count(std::size_t K) { return K * (K - 1) / 2; }

void scale_param(num::ParamStore &s, num::ParamId id, double c) {
  for (auto &x : s.value(id).data()) x *= c;
}

}  // namespace

DenoiserModel DenoiserModel::create(const ModelConfig &cfg, num::Rng &rng) {
  cfg.validate();
  DenoiserModel m;
  m.cfg_ = cfg;
  auto &s = m.store_;
  const std::size_t dv = cfg.node_dim, de = cfg.edge_dim, h = cfg.hidden, dt = cfg.time_dim;
  m.atom_in = num::Linear::create(s, "embed.atom", chem::AtomVocab::kSize, dv, rng);
  m.pocket_in = num::Linear::create(s, "embed.pocket", chem::Pocket::kFeatureDim, dv, rng);
  m.node_time = num::Linear::create(s, "embed.node_time", dt, dv, rng, false);
  m.bond_in = num::Linear::create(s, "embed.bond", chem::BondVocab::kSize, de, rng);
  m.edge_time = num::Linear::create(s, "embed.edge_time", dt, de, rng, false);
  for (std::size_t k = 0; k < 3; ++k) {
    Tensor init = Tensor::matrix(1, de);
    for (auto &x : init.data()) x = rng.normal() * 0.1;
    m.pocket_edge[k] = s.add("embed.pocket_edge_" + std::to_string(k), std::move(init));
  }
  std::vector<std::size_t> dv_blocks{de, cfg.rbf};
  for (std::size_t g = 0; g < gap_count(cfg.targets); ++g) dv_blocks.push_back(cfg.rbf);
  for (std::size_t l = 0; l < cfg.layers; ++l) {
    const std::string p = "layer" + std::to_string(l) + ".";
    LayerParams lp;
    lp.phi_dv = num::Mlp::create(s, p + "phi_dv", dv_blocks, h, de, rng);
    lp.phi_dp = num::Mlp::create(s, p + "phi_dp", {de, cfg.rbf}, h, de, rng);
    lp.phi_m = num::Mlp::create(s, p + "phi_m", {dv, de, dt}, h, dv, rng);
    lp.phi_r = num::Mlp::create(s, p + "phi_r", {dv, dv, de, dt}, h, 1, rng);
    // Small initial displacements keep the untrained coordinate path tame.
    scale_param(s, lp.phi_r.weight2, 0.1);
    lp.node_self = num::Linear::create(s, p + "node_self", dv, dv, rng);
    lp.edge_u = num::Linear::create(s, p + "edge_u", dv, de, rng, false);
    lp.edge_v = num::Linear::create(s, p + "edge_v", dv, de, rng, false);
    lp.edge_e = num::Linear::create(s, p + "edge_e", de, de, rng);
    lp.edge_msg = num::Linear::create(s, p + "edge_msg", dv, de, rng, false);
    m.layers_.push_back(lp);
  }
  m.atom_head = num::Linear::create(s, "head.atom", dv, chem::AtomVocab::kSize, rng);
  m.bond_head = num::Linear::create(s, "head.bond", de, chem::BondVocab::kSize, rng);
  return m;
}

num::TensorArchive DenoiserModel::to_archive(json header) const {
  header["model"] = cfg_.to_json();
  num::TensorArchive a;
  a.header_json = header.dump();
  for (auto id : store_.ids()) a.tensors.emplace_back(store_.name(id), store_.value(id));
  return a;
}

DenoiserModel DenoiserModel::from_archive(const num::TensorArchive &a) {
  json header;
  try {
    header = json::parse(a.header_json);
  } catch (const json::exception &e) {
    throw DlcfError(std::string("checkpoint header is not JSON: ") + e.what());
  }
  if (!header.contains("model")) throw DlcfError("checkpoint header lacks a model section");
  num::Rng dummy(0);
  DenoiserModel m = create(ModelConfig::from_json(header["model"]), dummy);
  if (a.tensors.size() != m.store_.size())
    throw DlcfError("checkpoint tensor count does not match the model configuration");
  for (auto id : m.store_.ids()) {
    const Tensor *t = nullptr;
    try {
      t = &a.get(m.store_.name(id));
    } catch (const num::NumericsError &) {
      throw DlcfError("checkpoint lacks parameter '" + m.store_.name(id) + "'");
    }
    if (!t->same_shape(m.store_.value(id)))
      throw DlcfError("checkpoint parameter '" + m.store_.name(id) + "' has the wrong shape");
    m.store_.value(id) = *t;
  }
  return m;
}

// ---- layer pieces -------------------------------------------------------------

namespace {

Var distance_col(Var diff) {
  return num::sqrt(num::add_scalar(num::row_sum(num::square(diff)), 1e-12));
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> c(n);
  for (std::size_t i = 0; i < n; ++i)
    c[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return c;
}

double rbf_gamma(double span, std::size_t n) {
  const double step = span / static_cast<double>(n - 1);
  return 0.5 / (step * step);
}

Var basis(Var d, double span, std::size_t n) {
  const auto c = linspace(0.0, span, n);
  return num::rbf(d, c, rbf_gamma(span, n));
}

void accumulate(Var &total, Var x) {
  if (!x.valid()) return;
  total = total.valid() ? num::add(total, x) : x;
}

std::vector<std::size_t> iota_vec(std::size_t n, std::size_t start = 0) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), start);
  return v;
}

struct TargetIndex {
  std::vector<std::size_t> lp_u, lp_w, lp_wg;  // ligand, pocket local, pocket global
  std::vector<std::size_t> pp_dst, pp_src;     // global, both directions
  std::vector<std::size_t> pp_a, pp_b;         // local
};

// 1 / (incoming message count) per fused node.
Tensor inverse_degree(const DualGraph &g) {
  const std::size_t N = g.node_count(), n = g.n_lig;
  std::vector<double> deg(N, 0.0);
  for (std::size_t u = 0; u < n; ++u) deg[u] = static_cast<double>(n - 1);
  for (std::size_t k = 0; k < g.targets.size(); ++k) {
    for (auto [u, w] : g.targets[k].lig_pocket) {
      deg[u] += 1.0;
      deg[g.offsets[k] + w] += 1.0;
    }
    for (auto [a, b] : g.targets[k].pocket_pocket) {
      deg[g.offsets[k] + a] += 1.0;
      deg[g.offsets[k] + b] += 1.0;
    }
  }
  Tensor t = Tensor::matrix(N, 1);
  for (std::size_t i = 0; i < N; ++i) t(i, 0) = deg[i] > 0.0 ? 1.0 / deg[i] : 0.0;
  return t;
}

TargetIndex index_target(const DualGraph &g, std::size_t k) {
  TargetIndex ix;
  const auto &tg = g.targets[k];
  const std::size_t off = g.offsets[k];
  for (auto [u, w] : tg.lig_pocket) {
    ix.lp_u.push_back(u);
    ix.lp_w.push_back(w);
    ix.lp_wg.push_back(off + w);
  }
  for (auto [a, b] : tg.pocket_pocket) {
    ix.pp_a.push_back(a);
    ix.pp_b.push_back(b);
  }
  for (auto [a, b] : tg.pocket_pocket) {
    ix.pp_dst.push_back(off + a);
    ix.pp_src.push_back(off + b);
  }
  for (auto [a, b] : tg.pocket_pocket) {
    ix.pp_dst.push_back(off + b);
    ix.pp_src.push_back(off + a);
  }
  return ix;
}

Tensor gather_fixed(const Tensor &t, std::span<const std::size_t> idx) {
  Tensor out = Tensor::matrix(idx.size(), t.cols());
  for (std::size_t e = 0; e < idx.size(); ++e)
    for (std::size_t j = 0; j < t.cols(); ++j) out(e, j) = t(idx[e], j);
  return out;
}

}  // namespace

EdgeFeatures edge_features(Tape &tape, DenoiserModel &m, const LayerParams &lp,
                           const LayerInput &in, const LayerState &s) {
  const auto &g = *in.graph;
  const auto &cfg = m.config();
  auto &store = m.params();
  const std::size_t K = g.n_targets();
  EdgeFeatures ef;

  if (g.n_lig >= 2) {
    for (std::size_t k = 0; k < K; ++k) {
      Var diff = num::sub(num::gather_rows(s.r[k], g.ll_dst), num::gather_rows(s.r[k], g.ll_src));
      ef.ll_dist.push_back(distance_col(diff));
    }
    Var stats = symmetric_stats(K == 1 ? ef.ll_dist[0] : num::concat_cols(ef.ll_dist));
    std::vector<Var> blocks{s.e_ll,
                            basis(num::slice_cols(stats, 0, 1), cfg.rbf_max * K, cfg.rbf)};
    for (std::size_t c = 1; c < stats.cols(); ++c)
      blocks.push_back(basis(num::slice_cols(stats, c, c + 1), cfg.rbf_max, cfg.rbf));
    ef.ll = lp.phi_dv(tape, store, blocks);
  }

  Var kind[3];
  for (std::size_t c = 0; c < 3; ++c)
    kind[c] = lp.phi_dp.project(tape, store, 0, tape.param(store, m.pocket_edge[c]));
  for (std::size_t k = 0; k < K; ++k) {
    const auto ix = index_target(g, k);
    Var lf, pf, pp, ld;
    if (!ix.lp_u.empty()) {
      Var diff = num::sub(num::gather_rows(s.r[k], ix.lp_u),
                          tape.constant(gather_fixed(in.pockets[k], ix.lp_w)));
      ld = distance_col(diff);
      Var pre = lp.phi_dp.project(tape, store, 1, basis(ld, cfg.rbf_max, cfg.rbf));
      lf = lp.phi_dp.finish(tape, store, num::add_row(pre, kind[kLigFromPocket]));
      pf = lp.phi_dp.finish(tape, store, num::add_row(pre, kind[kPocketFromLig]));
    }
    Tensor fixed;
    if (!ix.pp_a.empty()) {
      const std::size_t E = ix.pp_a.size();
      fixed = Tensor::matrix(2 * E, 1);
      for (std::size_t e = 0; e < E; ++e) {
        double d2 = 0.0;
        for (std::size_t c = 0; c < 3; ++c) {
          const double x = in.pockets[k](ix.pp_a[e], c) - in.pockets[k](ix.pp_b[e], c);
          d2 += x * x;
        }
        fixed(e, 0) = fixed(E + e, 0) = std::sqrt(d2 + 1e-12);
      }
      Var pre = lp.phi_dp.project(tape, store, 1, basis(tape.constant(fixed), cfg.rbf_max, cfg.rbf));
      pp = lp.phi_dp.finish(tape, store, num::add_row(pre, kind[kPocketPocket]));
    }
    ef.lp_dist.push_back(ld);
    ef.pp_dist.push_back(std::move(fixed));
    ef.lig_from_pocket.push_back(lf);
    ef.pocket_from_lig.push_back(pf);
    ef.pocket_pocket.push_back(pp);
  }
  return ef;
}

std::pair<LayerState, Var> message_pass(Tape &tape, DenoiserModel &m, const LayerParams &lp,
                                        const LayerInput &in, const LayerState &s,
                                        const EdgeFeatures &ef) {
  const auto &g = *in.graph;
  auto &store = m.params();
  const std::size_t N = g.node_count(), n = g.n_lig, K = g.n_targets();

  Var proj_v = lp.phi_m.project(tape, store, 0, s.v);
  Var tau = lp.phi_m.project(tape, store, 2, in.tau);
  auto messages = [&](std::span<const std::size_t> src, Var etilde) {
    Var pre = num::add(num::gather_rows(proj_v, src), lp.phi_m.project(tape, store, 1, etilde));
    return lp.phi_m.finish(tape, store, num::add_row(pre, tau));
  };

  Var agg_ll;
  if (n >= 2) agg_ll = num::scatter_add_rows(messages(g.ll_src, ef.ll), g.ll_dst, N);
  // Ligand rows gather pocket context from every target; summing the
  // per-target blocks separately keeps the result independent of target order.
  Var from_pockets, to_pockets;
  for (std::size_t k = 0; k < K; ++k) {
    const auto ix = index_target(g, k);
    if (!ix.lp_u.empty()) {
      accumulate(from_pockets,
                 num::scatter_add_rows(messages(ix.lp_wg, ef.lig_from_pocket[k]), ix.lp_u, N));
      accumulate(to_pockets,
                 num::scatter_add_rows(messages(ix.lp_u, ef.pocket_from_lig[k]), ix.lp_wg, N));
    }
    if (!ix.pp_dst.empty())
      accumulate(to_pockets,
                 num::scatter_add_rows(messages(ix.pp_src, ef.pocket_pocket[k]), ix.pp_dst, N));
  }
  Var pocket_part;
  accumulate(pocket_part, from_pockets);
  accumulate(pocket_part, to_pockets);
  Var agg;
  accumulate(agg, agg_ll);
  accumulate(agg, pocket_part);
  if (!agg.valid()) agg = tape.constant(Tensor::matrix(N, m.config().node_dim));
  agg = num::mul_col(agg, tape.constant(inverse_degree(g)));

  LayerState out;
  out.v = num::add(lp.node_self(tape, store, s.v), agg);
  out.r = s.r;
  if (n >= 2) {
    const auto lig = iota_vec(n);
    Var v_lig = num::gather_rows(s.v, lig);
    Var agg_lig = num::gather_rows(agg, lig);
    Var e = num::add(num::gather_rows(lp.edge_u(tape, store, v_lig), g.ll_dst),
                     num::gather_rows(lp.edge_v(tape, store, v_lig), g.ll_src));
    e = num::add(e, lp.edge_e(tape, store, s.e_ll));
    Var both = num::add(num::gather_rows(agg_lig, g.ll_dst), num::gather_rows(agg_lig, g.ll_src));
    out.e_ll = num::add(e, lp.edge_msg(tape, store, both));
  }
  return {out, agg};
}

std::vector<Var> coord_update(Tape &tape, DenoiserModel &m, const LayerParams &lp,
                              const LayerInput &in, const LayerState &u, const EdgeFeatures &ef) {
  const auto &g = *in.graph;
  const auto &cfg = m.config();
  auto &store = m.params();
  const std::size_t n = g.n_lig, K = g.n_targets();

  Var pu = lp.phi_r.project(tape, store, 0, num::gather_rows(u.v, iota_vec(n)));
  Var pw = lp.phi_r.project(tape, store, 1, u.v);
  Var tau = lp.phi_r.project(tape, store, 3, in.tau);
  auto weights = [&](std::span<const std::size_t> dst, std::span<const std::size_t> src,
                     Var etilde, Var dist) {
    Var pre = num::add(num::gather_rows(pu, dst), num::gather_rows(pw, src));
    pre = num::add(pre, lp.phi_r.project(tape, store, 2, etilde));
    Var coef = lp.phi_r.finish(tape, store, num::add_row(pre, tau));
    return num::mul(coef, num::reciprocal(num::add_scalar(num::square(dist), cfg.coord_eps)));
  };

  // e~ on ligand edges is refreshed from the updated edge embeddings; the
  // distance statistics are those of the current (pre-update) geometry.
  Var ll_tilde;
  if (n >= 2) {
    Var stats = symmetric_stats(K == 1 ? ef.ll_dist[0] : num::concat_cols(ef.ll_dist));
    std::vector<Var> blocks{u.e_ll, basis(num::slice_cols(stats, 0, 1), cfg.rbf_max * K, cfg.rbf)};
    for (std::size_t c = 1; c < stats.cols(); ++c)
      blocks.push_back(basis(num::slice_cols(stats, c, c + 1), cfg.rbf_max, cfg.rbf));
    ll_tilde = lp.phi_dv(tape, store, blocks);
  }

  std::vector<Var> out;
  for (std::size_t k = 0; k < K; ++k) {
    Var delta;
    if (n >= 2) {
      Var diff = num::sub(num::gather_rows(u.r[k], g.ll_dst), num::gather_rows(u.r[k], g.ll_src));
      Var w = weights(g.ll_dst, g.ll_src, ll_tilde, ef.ll_dist[k]);
      accumulate(delta, num::scatter_add_rows(num::mul_col(diff, w), g.ll_dst, n));
    }
    const auto ix = index_target(g, k);
    if (!ix.lp_u.empty()) {
      Var diff = num::sub(num::gather_rows(u.r[k], ix.lp_u),
                          tape.constant(gather_fixed(in.pockets[k], ix.lp_w)));
      Var w = weights(ix.lp_u, ix.lp_wg, ef.lig_from_pocket[k], ef.lp_dist[k]);
      accumulate(delta, num::scatter_add_rows(num::mul_col(diff, w), ix.lp_u, n));
    }
    out.push_back(delta.valid() ? num::add(u.r[k], num::scale(delta, in.coord_gate)) : u.r[k]);
  }
  return out;
}

// ---- denoiser -----------------------------------------------------------------

namespace {

std::vector<chem::Vec3> rows_of(const Tensor &t) {
  std::vector<chem::Vec3> v(t.rows());
  for (std::size_t i = 0; i < t.rows(); ++i) v[i] = {t(i, 0), t(i, 1), t(i, 2)};
  return v;
}

}  // namespace

DenoiserVars denoise(Tape &tape, DenoiserModel &m, const sched::NoisyState &state,
                     std::span<const chem::Pocket> pockets, std::size_t steps) {
  const auto &cfg = m.config();
  auto &store = m.params();
  const std::size_t K = cfg.targets, n = state.n_atoms();
  if (n == 0) throw DlcfError("denoise: empty ligand");
  if (state.poses.size() != K || pockets.size() != K)
    throw DlcfError("denoise: model expects " + std::to_string(K) + " targets");
  if (state.t < 1 || state.t > steps) throw DlcfError("denoise: t outside [1, T]");
  for (const auto &p : state.poses)
    if (p.size() != n) throw DlcfError("denoise: pose rows do not match ligand atoms");

  LayerInput in;
  in.tau = tape.constant(time_embedding(state.t, steps, cfg.time_dim));
  in.coord_gate = coord_gate(state.t, steps);
  for (const auto &p : pockets) in.pockets.push_back(chem::Pose{p.coords}.to_tensor());

  LayerState s;
  for (const auto &p : state.poses) s.r.push_back(tape.constant(p.to_tensor()));

  auto build = [&] {
    std::vector<TargetGraph> gs;
    for (std::size_t k = 0; k < K; ++k)
      gs.push_back(knn_graph(rows_of(s.r[k].value()), pockets[k].coords, cfg.knn));
    return fuse_k_targets(std::move(gs));
  };

  DualGraph g = build();
  const std::size_t N = g.node_count();
  Var v = num::scatter_add_rows(m.atom_in(tape, store, tape.constant(state.graph.atom_onehot())),
                                iota_vec(n), N);
  for (std::size_t k = 0; k < K; ++k)
    v = num::add(v, num::scatter_add_rows(
                        m.pocket_in(tape, store, tape.constant(pockets[k].features())),
                        iota_vec(pockets[k].size(), g.offsets[k]), N));
  s.v = num::add_row(v, m.node_time(tape, store, in.tau));
  if (n >= 2) {
    std::vector<std::size_t> pair_of(g.ll_dst.size());
    for (std::size_t e = 0; e < pair_of.size(); ++e)
      pair_of[e] = chem::pair_index(std::min(g.ll_dst[e], g.ll_src[e]),
                                    std::max(g.ll_dst[e], g.ll_src[e]), n);
    Var pb = m.bond_in(tape, store, tape.constant(state.graph.bond_onehot()));
    s.e_ll = num::add_row(num::gather_rows(pb, pair_of), m.edge_time(tape, store, in.tau));
  }

  for (std::size_t l = 0; l < cfg.layers; ++l) {
    if (l > 0) g = build();
    in.graph = &g;
    const auto &lp = m.layer(l);
    EdgeFeatures ef = edge_features(tape, m, lp, in, s);
    auto [next, agg] = message_pass(tape, m, lp, in, s, ef);
    next.r = coord_update(tape, m, lp, in, next, ef);
    s = std::move(next);
  }

  DenoiserVars out;
  out.x = s.r;
  Var v_lig = num::gather_rows(s.v, iota_vec(n));
  out.atom_probs = num::softmax_rows(m.atom_head(tape, store, v_lig));
  if (n >= 2) {
    Var logits = m.bond_head(tape, store, s.e_ll);
    std::vector<std::size_t> fwd, rev;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        fwd.push_back(g.ll_row(i, j));
        rev.push_back(g.ll_row(j, i));
      }
    Var sym = num::scale(num::add(num::gather_rows(logits, fwd), num::gather_rows(logits, rev)), 0.5);
    out.bond_probs = num::softmax_rows(sym);
  }
  return out;
}

DenoiserOutput denoise(DenoiserModel &m, const sched::NoisyState &state,
                       std::span<const chem::Pocket> pockets, std::size_t steps) {
  Tape tape(false);
  auto vars = denoise(tape, m, state, pockets, steps);
  DenoiserOutput out;
  for (auto &x : vars.x) out.x.push_back(chem::Pose::from_tensor(x.value()));
  out.atom_probs = vars.atom_probs.value();
  if (vars.bond_probs.valid()) out.bond_probs = vars.bond_probs.value();
  else out.bond_probs = Tensor::matrix(0, chem::BondVocab::kSize);
  return out;
}

}  // namespace dualfuse::dlcf
