//
// Project dualfuse - Copyright 2026 The dualfuse Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "dualfuse/sample.hpp"

#include <algorithm>
#include <cmath>

#include "dualfuse/chem/io.hpp"
#include "dualfuse/chem/validity.hpp"

namespace dualfuse::sample {

using nlohmann::json;
using num::Tensor;

Mode mode_from_string(const std::string &s) {
  if (s == "full") return Mode::kFull;
  if (s == "no-bond" || s == "no_bond_gen") return Mode::kNoBondGen;
  if (s == "sequential" || s == "no_dlcf_sequential") return Mode::kSequential;
  throw SampleError("unknown sampling mode '" + s + "' (expected full, no-bond or sequential)");
}

std::string to_string(Mode m) {
  switch (m) {
    case Mode::kFull: return "full";
    case Mode::kNoBondGen: return "no-bond";
    case Mode::kSequential: return "sequential";
  }
  return "full";
}

void SampleConfig::validate() const {
  if (count < 1) throw SampleError("sample: count must be at least 1");
}

json SampleConfig::to_json() const {
  return {{"n_atoms", n_atoms}, {"steps", steps},   {"seed", seed},
          {"count", count},     {"mode", to_string(mode)}, {"mirror_streams", mirror_streams}};
}

namespace {

std::size_t draw_category(const std::vector<double> &p, num::Rng &rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    acc += p[j];
    if (u < acc) return j;
  }
  // Rounding left a sliver above the last cumulative value.
  for (std::size_t j = p.size(); j-- > 0;)
    if (p[j] > 0.0) return j;
  return 0;
}

// Posterior row; if the prediction puts (numerically) no mass on anything
// consistent with x_t, a tiny uniform floor restores a valid distribution.
std::vector<double> posterior_row(std::size_t xt, std::span<const double> x0_hat, std::size_t t,
                                  sched::Channel c, const sched::NoiseSchedule &sched) {
  std::vector<double> x0(x0_hat.begin(), x0_hat.end());
  try {
    return sched::categorical_posterior(xt, x0, t, c, sched);
  } catch (const sched::ScheduleError &) {
    double z = 0.0;
    for (auto &v : x0) z += (v += 1e-12);
    for (auto &v : x0) v /= z;
    return sched::categorical_posterior(xt, x0, t, c, sched);
  }
}

}  // namespace

sched::NoisyState reverse_step(const sched::NoisyState &state, const dlcf::DenoiserOutput &pred,
                               const sched::NoiseSchedule &sched, num::Rng &rng, bool bonds,
                               std::array<std::size_t, 2> pose_streams) {
  return detail::reverse_step(state, pred, sched, rng, bonds, pose_streams, false);
}

namespace detail {

sched::NoisyState reverse_step(const sched::NoisyState &state, const dlcf::DenoiserOutput &pred,
                               const sched::NoiseSchedule &sched, num::Rng &rng, bool bonds,
                               std::array<std::size_t, 2> pose_streams, bool argmax) {
  const std::size_t t = state.t, n = state.n_atoms();
  if (t < 1) throw SampleError("reverse_step: t must be at least 1");
  if (t > sched.steps()) throw SampleError("reverse_step: t beyond the schedule");
  if (pred.x.size() != state.poses.size() || pred.atom_probs.rows() != n)
    throw SampleError("reverse_step: prediction does not match the state");
  if (state.poses.size() > pose_streams.size()) throw SampleError("reverse_step: too many poses");

  const num::Rng base(rng.next_u64());
  sched::NoisyState out = state;
  out.t = t - 1;
  for (std::size_t k = 0; k < state.poses.size(); ++k) {
    auto [mean, var] = sched::gaussian_posterior(state.poses[k], pred.x[k], t, sched);
    if (var > 0.0) {
      num::Rng r = base.split(1 + pose_streams[k]);
      const double sd = std::sqrt(var);
      for (auto &x : mean.coords)
        for (auto &c : x) c += sd * r.normal();
    }
    out.poses[k] = std::move(mean);
  }

  num::Rng cat = base.split(0);
  auto pick = [&](const std::vector<double> &p) {
    return argmax ? static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin())
                  : draw_category(p, cat);
  };
  for (std::size_t i = 0; i < n; ++i)
    out.graph.set_atom_type(
        i, pick(posterior_row(state.graph.atom_type(i), pred.atom_probs.row(i), t, sched::Channel::kAtom, sched)));
  if (bonds && n >= 2) {
    if (pred.bond_probs.rows() != chem::pair_count(n))
      throw SampleError("reverse_step: bond prediction does not match the state");
    std::size_t r = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j, ++r) {
        const auto xt = static_cast<std::size_t>(state.graph.bond(i, j));
        auto p = posterior_row(xt, pred.bond_probs.row(r), t, sched::Channel::kBond, sched);
        out.graph.set_bond(i, j, static_cast<chem::BondType>(pick(p)));
      }
  }
  return out;
}

}  // namespace detail

std::size_t draw_n_atoms(const std::map<std::size_t, std::size_t> &hist, num::Rng &rng) {
  std::size_t total = 0;
  for (auto [size, count] : hist)
    if (size >= 1) total += count;
  if (total == 0) throw SampleError("sample: empty ligand size histogram; pass an explicit atom count");
  std::uint64_t u = rng.uniform_int(total);
  for (auto [size, count] : hist) {
    if (size < 1) continue;
    if (u < count) return size;
    u -= count;
  }
  return hist.rbegin()->first;
}

json sample_to_json(const GeneratedSample &s, const std::string &pocket1, const std::string &pocket2,
                    Mode mode) {
  return {{"index", s.index},
          {"mode", to_string(mode)},
          {"pocket1", pocket1},
          {"pocket2", pocket2},
          {"ligand", chem::ligand_to_json(s.graph)},
          {"pose1", chem::pose_to_json(s.pose1)},
          {"pose2", chem::pose_to_json(s.pose2)}};
}

GeneratedSample sample_from_json(const json &j) {
  try {
    GeneratedSample s;
    s.index = j.value("index", std::size_t{0});
    s.graph = chem::ligand_from_json(j.at("ligand"));
    s.pose1 = chem::pose_from_json(j.at("pose1"));
    s.pose2 = chem::pose_from_json(j.at("pose2"));
    if (s.pose1.size() != s.graph.n_atoms() || s.pose2.size() != s.graph.n_atoms())
      throw SampleError("sample row: pose size does not match the ligand");
    return s;
  } catch (const json::exception &e) {
    throw SampleError(std::string("malformed sample row: ") + e.what());
  }
}

namespace {

struct Frame {
  chem::Pocket pocket;
  chem::Vec3 offset;
};

Frame centered(const chem::Pocket &p) {
  p.check();
  if (p.size() == 0) throw SampleError("sample: empty pocket " + p.id);
  const auto o = p.center();
  return {p.translated({-o[0], -o[1], -o[2]}), o};
}

// Full reverse chain over the given pockets; returns the final state with
// categories discretized by argmax of the last posterior. With `frozen`
// set, (V, B) stay fixed and only positions are denoised.
sched::NoisyState run_chain(train::Checkpoint &ck, std::vector<chem::Pocket> pockets,
                            sched::NoisyState state, bool bonds, const chem::LigandGraph *frozen,
                            std::array<std::size_t, 2> streams, num::Rng &rng) {
  const std::size_t T = ck.schedule.steps();
  for (std::size_t t = T; t >= 1; --t) {
    state.t = t;
    auto pred = dlcf::denoise(ck.model, state, pockets, T);
    // The last transition is discretized by argmax instead of a draw.
    sched::NoisyState next = detail::reverse_step(state, pred, ck.schedule, rng, bonds, streams, t == 1);
    if (frozen) next.graph = *frozen;
    state = std::move(next);
  }
  return state;
}

}  // namespace

std::vector<GeneratedSample> generate(const chem::Pocket &p1, const chem::Pocket &p2,
                                      train::Checkpoint &ck, const SampleConfig &cfg) {
  cfg.validate();
  const std::size_t T = ck.schedule.steps();
  if (cfg.steps != 0 && cfg.steps != T)
    throw SampleError("sample: requested T=" + std::to_string(cfg.steps) + " but the checkpoint was trained with T=" +
                      std::to_string(T));
  const auto &tc = ck.config;
  const bool want_no_bond = cfg.mode == Mode::kNoBondGen, want_seq = cfg.mode == Mode::kSequential;
  if (tc.no_bond_gen != want_no_bond || tc.no_dlcf != want_seq)
    throw SampleError("sample: mode '" + to_string(cfg.mode) + "' does not match the checkpoint (no_bond_gen=" +
                      (tc.no_bond_gen ? "true" : "false") + ", no_dlcf=" + (tc.no_dlcf ? "true" : "false") + ")");
  if (ck.model.config().targets != (want_seq ? 1u : 2u))
    throw SampleError("sample: checkpoint model has the wrong number of targets for this mode");

  const Frame f1 = centered(p1), f2 = centered(p2);
  const num::Rng root(cfg.seed);
  const std::array<std::size_t, 2> streams =
      cfg.mirror_streams ? std::array<std::size_t, 2>{1, 0} : std::array<std::size_t, 2>{0, 1};

  std::vector<GeneratedSample> out;
  for (std::size_t s = 0; s < cfg.count; ++s) {
    num::Rng rng = root.split(s);
    const std::size_t n = cfg.n_atoms > 0 ? cfg.n_atoms : draw_n_atoms(ck.n_atoms_histogram, rng);
    GeneratedSample g;
    g.index = s;
    if (!want_seq) {
      sched::NoisyState base = sched::sample_base(n, 2, ck.schedule, rng);
      if (cfg.mirror_streams) std::swap(base.poses[0], base.poses[1]);
      auto fin = run_chain(ck, {f1.pocket, f2.pocket}, std::move(base), !want_no_bond, nullptr, streams, rng);
      g.graph = fin.graph;
      g.pose1 = train::restore_frame(fin.poses[0], f1.offset);
      g.pose2 = train::restore_frame(fin.poses[1], f2.offset);
      if (want_no_bond) {
        // Bonds are read off the first pose; the second pose is judged against them.
        chem::LigandGraph withb(g.graph.atom_types(), chem::infer_bonds(g.graph.atom_types(), fin.poses[0]));
        g.graph = withb;
      }
    } else {
      sched::NoisyState b1 = sched::sample_base(n, 1, ck.schedule, rng);
      auto fin1 = run_chain(ck, {f1.pocket}, std::move(b1), true, nullptr, {0, 1}, rng);
      g.graph = fin1.graph;
      sched::NoisyState b2 = sched::sample_base(n, 1, ck.schedule, rng);
      b2.graph = g.graph;
      auto fin2 = run_chain(ck, {f2.pocket}, std::move(b2), true, &g.graph, {0, 1}, rng);
      g.pose1 = train::restore_frame(fin1.poses[0], f1.offset);
      g.pose2 = train::restore_frame(fin2.poses[0], f2.offset);
    }
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace dualfuse::sample
