//
// Project dualfuse - Copyright 2026 The dualfuse Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "dualfuse/train.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "dualfuse/numerics/archive.hpp"
#include "dualfuse/numerics/params.hpp"

namespace dualfuse::train {

using nlohmann::json;
using num::Tape;
using num::Tensor;
using num::Var;

namespace {

void reject_unknown(const json &j, const std::set<std::string> &known, const std::string &where) {
  if (!j.is_object()) throw TrainError(where + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.contains(it.key())) throw TrainError(where + ": unknown key '" + it.key() + "'");
}

Var sum_or_zero(Tape &tape, Var v) { return v.valid() ? num::sum(v) : tape.constant(Tensor::scalar(0.0)); }

std::vector<std::size_t> bond_indices(const chem::LigandGraph &g) {
  std::vector<std::size_t> out;
  out.reserve(g.pair_bonds().size());
  for (auto b : g.pair_bonds()) out.push_back(static_cast<std::size_t>(b));
  return out;
}

Tensor to_tensor(const std::vector<std::vector<double>> &m) {
  Tensor t = Tensor::matrix(m.size(), m.empty() ? 0 : m[0].size());
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m[i].size(); ++j) t(i, j) = m[i][j];
  return t;
}

}  // namespace

// ---- weights and config ---------------------------------------------------------

void LossWeights::validate() const {
  for (double w : {position, atom, bond, bond_length})
    if (!(w >= 0.0) || !std::isfinite(w)) throw TrainError("loss weights must be finite and nonnegative");
}

json LossWeights::to_json() const {
  return {{"position", position}, {"atom", atom}, {"bond", bond}, {"bond_length", bond_length}};
}

LossWeights LossWeights::from_json(const json &j) {
  reject_unknown(j, {"position", "atom", "bond", "bond_length"}, "weights");
  LossWeights w;
  w.position = j.value("position", w.position);
  w.atom = j.value("atom", w.atom);
  w.bond = j.value("bond", w.bond);
  w.bond_length = j.value("bond_length", w.bond_length);
  w.validate();
  return w;
}

void TrainConfig::validate() const {
  if (steps == 0) throw TrainError("train: steps must be positive");
  if (batch_size == 0) throw TrainError("train: batch_size must be positive");
  if (!(learning_rate > 0.0)) throw TrainError("train: learning_rate must be positive");
  if (diffusion_steps < 2) throw TrainError("train: diffusion_steps must be at least 2");
  if (!(divergence_threshold > 0.0)) throw TrainError("train: divergence_threshold must be positive");
  weights.validate();
  model.validate();
  if (no_dlcf && model.targets != 1)
    throw TrainError("train: no_dlcf needs a single-target model (model.targets = 1)");
  if (!no_dlcf && model.targets != 2)
    throw TrainError("train: dual-target training needs model.targets = 2");
}

json TrainConfig::to_json() const {
  return {{"steps", steps},
          {"batch_size", batch_size},
          {"learning_rate", learning_rate},
          {"seed", seed},
          {"diffusion_steps", diffusion_steps},
          {"schedule", sched::to_string(schedule)},
          {"weights", weights.to_json()},
          {"model", model.to_json()},
          {"no_bond_gen", no_bond_gen},
          {"no_dlcf", no_dlcf},
          {"checkpoint_every", checkpoint_every},
          {"divergence_threshold", divergence_threshold}};
}

TrainConfig TrainConfig::from_json(const json &j) {
  reject_unknown(j,
                 {"steps", "batch_size", "learning_rate", "seed", "diffusion_steps", "schedule",
                  "weights", "model", "no_bond_gen", "no_dlcf", "checkpoint_every",
                  "divergence_threshold"},
                 "train config");
  TrainConfig c;
  try {
    c.steps = j.value("steps", c.steps);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.seed = j.value("seed", c.seed);
    c.diffusion_steps = j.value("diffusion_steps", c.diffusion_steps);
    if (j.contains("schedule")) c.schedule = sched::schedule_kind_from_string(j["schedule"]);
    if (j.contains("weights")) c.weights = LossWeights::from_json(j["weights"]);
    c.no_bond_gen = j.value("no_bond_gen", c.no_bond_gen);
    c.no_dlcf = j.value("no_dlcf", c.no_dlcf);
    // The single-target ablation defaults to K = 1 unless the model section says otherwise.
    if (c.no_dlcf) c.model.targets = 1;
    if (j.contains("model")) {
      json m = j["model"];
      reject_unknown(m,
                     {"node_dim", "edge_dim", "layers", "knn", "time_dim", "hidden", "rbf", "rbf_max",
                      "targets", "coord_eps"},
                     "model");
      if (c.no_dlcf && !m.contains("targets")) m["targets"] = 1;
      c.model = dlcf::ModelConfig::from_json(m);
    }
    c.checkpoint_every = j.value("checkpoint_every", c.checkpoint_every);
    c.divergence_threshold = j.value("divergence_threshold", c.divergence_threshold);
  } catch (const json::exception &e) {
    throw TrainError(std::string("train config: ") + e.what());
  } catch (const sched::ScheduleError &e) {
    throw TrainError(std::string("train config: ") + e.what());
  }
  c.validate();
  return c;
}

// ---- centering ------------------------------------------------------------------

CenteredInstance center_instance(const data::DualInstance &inst) {
  CenteredInstance c;
  c.id = inst.id;
  c.graph = inst.graph;
  const chem::Pose *poses[2] = {&inst.x1, &inst.x2};
  const chem::Pocket *pockets[2] = {&inst.p1, &inst.p2};
  for (int k = 0; k < 2; ++k) {
    if (pockets[k]->size() == 0) throw TrainError("center_instance: empty pocket in " + inst.id);
    const chem::Vec3 o = pockets[k]->center();
    c.offsets.push_back(o);
    c.pockets.push_back(pockets[k]->translated({-o[0], -o[1], -o[2]}));
    chem::Pose p = *poses[k];
    for (auto &x : p.coords)
      for (int d = 0; d < 3; ++d) x[d] -= o[d];
    c.poses.push_back(std::move(p));
  }
  return c;
}

chem::Pose restore_frame(const chem::Pose &centered, const chem::Vec3 &offset) {
  chem::Pose p = centered;
  for (auto &x : p.coords)
    for (int d = 0; d < 3; ++d) x[d] += offset[d];
  return p;
}

// ---- loss -----------------------------------------------------------------------

Var categorical_kl(Tape &tape, Var probs, const std::vector<std::size_t> &x0,
                   const std::vector<std::size_t> &xt, std::size_t t, sched::Channel c,
                   const sched::NoiseSchedule &sched) {
  const std::size_t rows = x0.size(), K = probs.cols();
  if (probs.rows() != rows || xt.size() != rows) throw TrainError("categorical_kl: row mismatch");
  if (rows == 0) return tape.constant(Tensor::scalar(0.0));
  Tensor qbar = to_tensor(sched::marginal_matrix(c, t - 1, K, sched));
  Tensor lik = Tensor::matrix(rows, K);
  Tensor truth = Tensor::matrix(rows, K);
  double neg_entropy = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    const auto l = sched::likelihood_factors(xt[r], K, t, c, sched);
    std::vector<double> onehot(K, 0.0);
    onehot.at(x0[r]) = 1.0;
    const auto q = sched::categorical_posterior(xt[r], onehot, t, c, sched);
    for (std::size_t j = 0; j < K; ++j) {
      lik(r, j) = l[j];
      truth(r, j) = q[j];
      if (q[j] > 0.0) neg_entropy += q[j] * std::log(q[j]);
    }
  }
  Var pred = num::row_normalize(num::mul(num::matmul(probs, tape.constant(qbar)), tape.constant(lik)));
  Var cross = num::sum(num::mul(tape.constant(truth), num::log_floor(pred, 1e-30)));
  Var kl = num::add_scalar(num::scale(cross, -1.0), neg_entropy);
  return num::scale(kl, 1.0 / static_cast<double>(rows));
}

LossTerms compute_loss(Tape &tape, const dlcf::DenoiserVars &pred, const sched::NoisyState &clean,
                       const sched::NoisyState &noisy, const LossWeights &w,
                       const sched::NoiseSchedule &sched, bool bond_channel) {
  const std::size_t n = clean.n_atoms(), t = noisy.t;
  if (pred.x.size() != clean.poses.size() || noisy.poses.size() != clean.poses.size())
    throw TrainError("compute_loss: pose count mismatch");
  if (noisy.n_atoms() != n || pred.atom_probs.rows() != n)
    throw TrainError("compute_loss: atom count mismatch");
  if (t < 1 || t > sched.steps()) throw TrainError("compute_loss: t outside [1, T]");

  LossTerms out;
  const double inv_n = 1.0 / static_cast<double>(n);
  Var pos = tape.constant(Tensor::scalar(0.0));
  for (std::size_t k = 0; k < clean.poses.size(); ++k) {
    Var d = num::sub(pred.x[k], tape.constant(clean.poses[k].to_tensor()));
    pos = num::add(pos, num::scale(num::sum(num::square(d)), inv_n));
  }

  Var atom = categorical_kl(tape, pred.atom_probs, clean.graph.atom_types(), noisy.graph.atom_types(),
                            t, sched::Channel::kAtom, sched);

  Var bond = tape.constant(Tensor::scalar(0.0));
  if (bond_channel && n >= 2) {
    if (!pred.bond_probs.valid()) throw TrainError("compute_loss: missing bond predictions");
    bond = categorical_kl(tape, pred.bond_probs, bond_indices(clean.graph), bond_indices(noisy.graph), t,
                          sched::Channel::kBond, sched);
  }

  Var bl = tape.constant(Tensor::scalar(0.0));
  const auto edges = clean.graph.edges();
  if (!edges.empty()) {
    std::vector<std::size_t> a, b;
    for (const auto &e : edges) {
      a.push_back(e.i);
      b.push_back(e.j);
    }
    for (std::size_t k = 0; k < clean.poses.size(); ++k) {
      Tensor ref = Tensor::matrix(edges.size(), 1);
      for (std::size_t e = 0; e < edges.size(); ++e)
        ref(e, 0) = chem::distance(clean.poses[k].coords[a[e]], clean.poses[k].coords[b[e]]);
      Var diff = num::sub(num::gather_rows(pred.x[k], a), num::gather_rows(pred.x[k], b));
      Var d = num::sqrt(num::add_scalar(num::row_sum(num::square(diff)), 1e-12));
      Var err = num::sub(d, tape.constant(ref));
      bl = num::add(bl, num::scale(sum_or_zero(tape, num::square(err)),
                                   1.0 / static_cast<double>(edges.size())));
    }
  }

  out.position = pos.value().item();
  out.atom_kl = atom.value().item();
  out.bond_kl = bond.value().item();
  out.bond_length = bl.value().item();
  for (double v : {out.position, out.atom_kl, out.bond_kl, out.bond_length})
    if (!std::isfinite(v)) throw TrainError("compute_loss: non-finite loss term at t=" + std::to_string(t));

  Var total = num::scale(pos, w.position);
  total = num::add(total, num::scale(atom, w.atom));
  total = num::add(total, num::scale(bond, w.bond));
  out.total = num::add(total, num::scale(bl, w.bond_length));
  out.total_value = out.total.value().item();
  return out;
}

// ---- checkpoints ----------------------------------------------------------------

void write_loss_csv(const std::filesystem::path &path, const std::vector<LossRecord> &curve) {
  std::ofstream os(path);
  if (!os) throw TrainError("cannot write loss curve " + path.string());
  os << "step,total,position,atom_kl,bond_kl,bond_length\n" << std::setprecision(17);
  for (const auto &r : curve)
    os << r.step << ',' << r.total << ',' << r.position << ',' << r.atom_kl << ',' << r.bond_kl << ','
       << r.bond_length << '\n';
  if (!os) throw TrainError("error writing loss curve " + path.string());
}

void save_checkpoint(const std::filesystem::path &path, const Checkpoint &ck) {
  json hist = json::object();
  for (auto [size, count] : ck.n_atoms_histogram) hist[std::to_string(size)] = count;
  json header = {{"format", "dualfuse-checkpoint"},
                 {"train", ck.config.to_json()},
                 {"schedule", ck.schedule.to_json()},
                 {"n_atoms_histogram", hist},
                 {"step", ck.step}};
  num::write_archive(path, ck.model.to_archive(header));
}

Checkpoint load_checkpoint(const std::filesystem::path &path) {
  num::TensorArchive a = num::read_archive(path);
  json header;
  try {
    header = json::parse(a.header_json);
  } catch (const json::exception &e) {
    throw TrainError("checkpoint header is not JSON: " + std::string(e.what()));
  }
  if (header.value("format", "") != "dualfuse-checkpoint")
    throw TrainError(path.string() + " is not a dualfuse checkpoint");
  try {
    Checkpoint ck{dlcf::DenoiserModel::from_archive(a),
                  sched::NoiseSchedule::from_json(header.at("schedule")),
                  TrainConfig::from_json(header.at("train")),
                  {},
                  header.value("step", std::size_t{0})};
    for (auto it = header.at("n_atoms_histogram").begin(); it != header.at("n_atoms_histogram").end(); ++it)
      ck.n_atoms_histogram[std::stoul(it.key())] = it.value().get<std::size_t>();
    return ck;
  } catch (const json::exception &e) {
    throw TrainError("malformed checkpoint header: " + std::string(e.what()));
  }
}

// ---- training loop --------------------------------------------------------------

namespace {

// One training example: a (possibly single-target) clean state with its pockets.
struct Example {
  sched::NoisyState clean;
  std::vector<chem::Pocket> pockets;
};

std::vector<Example> examples_of(const CenteredInstance &c, bool split_targets) {
  chem::LigandGraph g = c.graph;
  std::vector<Example> out;
  if (split_targets) {
    for (std::size_t k = 0; k < 2; ++k) out.push_back({sched::clean_state(g, {c.poses[k]}), {c.pockets[k]}});
  } else {
    out.push_back({sched::clean_state(g, c.poses), c.pockets});
  }
  return out;
}

sched::NoisyState strip_bonds(sched::NoisyState s) {
  const std::size_t n = s.n_atoms();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) s.graph.set_bond(i, j, chem::BondType::kNone);
  return s;
}

}  // namespace

FitResult fit(const std::vector<data::DualInstance> &dataset, const TrainConfig &cfg,
              const FitOptions &opts) {
  cfg.validate();
  if (dataset.empty()) throw TrainError("fit: empty dataset");

  std::vector<std::vector<Example>> pool;
  std::map<std::size_t, std::size_t> hist;
  for (const auto &inst : dataset) {
    inst.check();
    pool.push_back(examples_of(center_instance(inst), cfg.no_dlcf));
    ++hist[inst.graph.n_atoms()];
  }

  num::Rng root(cfg.seed);
  num::Rng init_rng = root.split(0);
  FitResult res{Checkpoint{dlcf::DenoiserModel::create(cfg.model, init_rng),
                           sched::NoiseSchedule::make(cfg.diffusion_steps, cfg.schedule), cfg, hist, 0},
                {}};
  auto &model = res.checkpoint.model;
  const auto &schedule = res.checkpoint.schedule;
  const num::AdamConfig adam{cfg.learning_rate};
  const bool bond_channel = !cfg.no_bond_gen;

  for (std::size_t step = 1; step <= cfg.steps; ++step) {
    num::Rng rng = root.split(step);
    model.params().zero_grad();
    LossRecord rec;
    rec.step = step;
    std::size_t count = 0;
    std::vector<std::pair<std::size_t, std::size_t>> picks;  // (instance, t)
    for (std::size_t b = 0; b < cfg.batch_size; ++b) {
      const std::size_t idx = rng.uniform_int(pool.size());
      const std::size_t t = 1 + rng.uniform_int(cfg.diffusion_steps);
      picks.emplace_back(idx, t);
      count += pool[idx].size();
    }
    const double scale = 1.0 / static_cast<double>(count);
    for (auto [idx, t] : picks) {
      for (const auto &ex : pool[idx]) {
        sched::NoisyState noisy = sched::forward_sample(ex.clean, t, schedule, rng);
        if (!bond_channel) noisy = strip_bonds(std::move(noisy));
        Tape tape;
        auto pred = dlcf::denoise(tape, model, noisy, ex.pockets, cfg.diffusion_steps);
        LossTerms lt = compute_loss(tape, pred, ex.clean, noisy, cfg.weights, schedule, bond_channel);
        if (lt.total_value > cfg.divergence_threshold) {
          std::ostringstream msg;
          msg << "training diverged at step " << step << " (instance "
              << dataset[idx].id << ", t=" << t << "): total " << lt.total_value << ", position "
              << lt.position << ", atom_kl " << lt.atom_kl << ", bond_kl " << lt.bond_kl
              << ", bond_length " << lt.bond_length << " exceeds " << cfg.divergence_threshold;
          throw DivergenceError(msg.str());
        }
        tape.backward(num::scale(lt.total, scale));
        rec.total += scale * lt.total_value;
        rec.position += scale * lt.position;
        rec.atom_kl += scale * lt.atom_kl;
        rec.bond_kl += scale * lt.bond_kl;
        rec.bond_length += scale * lt.bond_length;
      }
    }
    num::adam_step(model.params(), adam);
    res.curve.push_back(rec);
    res.checkpoint.step = step;
    if (opts.on_step) opts.on_step(rec);
    if (!opts.checkpoint_path.empty() && cfg.checkpoint_every > 0 && step % cfg.checkpoint_every == 0)
      save_checkpoint(opts.checkpoint_path, res.checkpoint);
  }
  if (!opts.checkpoint_path.empty()) save_checkpoint(opts.checkpoint_path, res.checkpoint);
  return res;
}

}  // namespace dualfuse::train
