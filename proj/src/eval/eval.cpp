//
// Project dualfuse - Copyright 2026 The dualfuse Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "dualfuse/eval.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include <Eigen/Dense>

namespace dualfuse::eval {

using nlohmann::json;

bool dual_valid(const chem::LigandGraph &g, const chem::Pose &x1, const chem::Pose &x2,
                const chem::ValidityConfig &cfg) {
  return chem::validate_assembly(g, x1, cfg).valid && chem::validate_assembly(g, x2, cfg).valid;
}

double dual_validity(const std::vector<sample::GeneratedSample> &samples, const chem::ValidityConfig &cfg) {
  if (samples.empty()) throw EvalError("dual_validity: empty sample list");
  std::size_t ok = 0;
  for (const auto &s : samples) ok += dual_valid(s.graph, s.pose1, s.pose2, cfg);
  return static_cast<double>(ok) / static_cast<double>(samples.size());
}

// ---- fingerprints -----------------------------------------------------------

namespace {

constexpr std::array<char, chem::BondVocab::kSize> kBondChar = {'?', '-', '=', '#', ':'};

}  // namespace

std::set<std::string> path_labels(const chem::LigandGraph &g, std::size_t max_bonds) {
  const std::size_t n = g.n_atoms();
  const auto adj = g.adjacency();
  std::set<std::string> out;
  std::vector<std::size_t> path;
  std::vector<bool> on_path(n, false);

  auto label = [&](bool reversed) {
    std::string s;
    for (std::size_t k = 0; k < path.size(); ++k) {
      const std::size_t a = reversed ? path[path.size() - 1 - k] : path[k];
      if (k > 0) {
        const std::size_t prev = reversed ? path[path.size() - k] : path[k - 1];
        s += kBondChar[static_cast<std::size_t>(g.bond(prev, a))];
      }
      s += chem::AtomVocab::symbol(g.atom_type(a));
    }
    return s;
  };

  std::function<void(std::size_t)> walk = [&](std::size_t u) {
    path.push_back(u);
    on_path[u] = true;
    out.insert(std::min(label(false), label(true)));
    if (path.size() <= max_bonds)
      for (std::size_t w : adj[u])
        if (!on_path[w]) walk(w);
    on_path[u] = false;
    path.pop_back();
  };
  for (std::size_t u = 0; u < n; ++u) walk(u);
  return out;
}

std::uint64_t fnv1a(const std::string &s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::set<std::uint64_t> path_hashes(const chem::LigandGraph &g, std::size_t max_bonds) {
  std::set<std::uint64_t> out;
  for (const auto &l : path_labels(g, max_bonds)) out.insert(fnv1a(l));
  return out;
}

Fingerprint fingerprint(const chem::LigandGraph &g, std::size_t max_bonds) {
  Fingerprint f;
  for (auto h : path_hashes(g, max_bonds)) f.set(h % kFingerprintBits);
  return f;
}

double tanimoto_distance(const Fingerprint &a, const Fingerprint &b) {
  const auto uni = (a | b).count();
  if (uni == 0) return 0.0;
  return 1.0 - static_cast<double>((a & b).count()) / static_cast<double>(uni);
}

double tanimoto_distance(const std::set<std::uint64_t> &a, const std::set<std::uint64_t> &b) {
  std::size_t inter = 0;
  for (auto h : a) inter += b.contains(h);
  const std::size_t uni = a.size() + b.size() - inter;
  if (uni == 0) return 0.0;
  return 1.0 - static_cast<double>(inter) / static_cast<double>(uni);
}

double diversity(const std::vector<chem::LigandGraph> &graphs, bool folded) {
  if (graphs.size() < 2) throw EvalError("diversity: need at least two molecules");
  double sum = 0.0;
  std::size_t pairs = 0;
  if (folded) {
    std::vector<Fingerprint> f;
    for (const auto &g : graphs) f.push_back(fingerprint(g));
    for (std::size_t i = 0; i < f.size(); ++i)
      for (std::size_t j = i + 1; j < f.size(); ++j, ++pairs) sum += tanimoto_distance(f[i], f[j]);
  } else {
    std::vector<std::set<std::uint64_t>> f;
    for (const auto &g : graphs) f.push_back(path_hashes(g));
    for (std::size_t i = 0; i < f.size(); ++i)
      for (std::size_t j = i + 1; j < f.size(); ++j, ++pairs) sum += tanimoto_distance(f[i], f[j]);
  }
  return sum / static_cast<double>(pairs);
}

// ---- drug-likeness ----------------------------------------------------------

namespace {

constexpr std::array<double, chem::AtomVocab::kSize> kMass = {12.011, 14.007, 15.999, 18.998,
                                                             30.974, 32.06,  35.45,  79.904};
constexpr double kHydrogenMass = 1.008;

bool is_n_or_o(std::size_t type) { return type == 1 || type == 2; }

}  // namespace

std::vector<int> implicit_hydrogens(const chem::LigandGraph &g) {
  const auto sums = chem::bond_order_sums(g);
  std::vector<int> h(g.n_atoms());
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double spare = chem::AtomVocab::kMaxValence[g.atom_type(i)] - sums[i];
    h[i] = spare > 0.0 ? static_cast<int>(std::floor(spare + 1e-9)) : 0;
  }
  return h;
}

LipinskiProxy lipinski(const chem::LigandGraph &g) {
  LipinskiProxy p;
  const auto h = implicit_hydrogens(g);
  for (std::size_t i = 0; i < g.n_atoms(); ++i) {
    const std::size_t t = g.atom_type(i);
    p.mass += kMass[t] + kHydrogenMass * h[i];
    if (is_n_or_o(t)) {
      ++p.hba;
      if (h[i] > 0) ++p.hbd;
    }
  }
  p.satisfied = (p.mass <= 500.0) + (p.hbd <= 5) + (p.hba <= 10);
  return p;
}

// ---- reports ----------------------------------------------------------------

MetricsReport evaluate(const std::vector<sample::GeneratedSample> &samples, const chem::ValidityConfig &cfg) {
  if (samples.empty()) throw EvalError("evaluate: empty sample list");
  MetricsReport r;
  r.n_samples = samples.size();
  std::size_t dual = 0, lip = 0;
  std::vector<chem::LigandGraph> graphs;
  for (const auto &s : samples) {
    SampleMetrics m;
    m.index = s.index;
    m.n_atoms = s.graph.n_atoms();
    m.pose1_valid = chem::validate_assembly(s.graph, s.pose1, cfg).valid;
    m.pose2_valid = chem::validate_assembly(s.graph, s.pose2, cfg).valid;
    m.dual_valid = m.pose1_valid && m.pose2_valid;
    m.lipinski = lipinski(s.graph);
    dual += m.dual_valid;
    lip += m.lipinski.satisfied;
    graphs.push_back(s.graph);
    r.per_sample.push_back(m);
  }
  const double n = static_cast<double>(samples.size());
  r.dual_validity = dual / n;
  r.lipinski_mean = lip / n;
  if (graphs.size() >= 2) r.diversity = diversity(graphs);
  return r;
}

json MetricsReport::to_json() const {
  json rows = json::array();
  for (const auto &m : per_sample)
    rows.push_back({{"index", m.index},
                    {"n_atoms", m.n_atoms},
                    {"pose1_valid", m.pose1_valid},
                    {"pose2_valid", m.pose2_valid},
                    {"dual_valid", m.dual_valid},
                    {"mass", m.lipinski.mass},
                    {"hbd_proxy", m.lipinski.hbd},
                    {"hba_proxy", m.lipinski.hba},
                    {"lipinski_satisfied", m.lipinski.satisfied}});
  return {{"n_samples", n_samples},
          {"dual_validity", dual_validity},
          {"diversity", diversity ? json(*diversity) : json(nullptr)},
          {"lipinski_mean", lipinski_mean},
          {"qed", nullptr},
          {"sa", nullptr},
          {"logp", nullptr},
          {"vina_score", nullptr},
          {"vina_min", nullptr},
          {"vina_dock", nullptr},
          {"per_sample", rows}};
}

// ---- symmetry verifier ------------------------------------------------------

double kabsch_rmsd(const chem::Pose &a, const chem::Pose &b) {
  const std::size_t n = a.size();
  if (n == 0 || n != b.size()) throw EvalError("kabsch_rmsd: poses must be nonempty and equal in size");
  Eigen::MatrixX3d P(n, 3), Q(n, 3);
  for (std::size_t i = 0; i < n; ++i)
    for (int d = 0; d < 3; ++d) {
      P(i, d) = a.coords[i][d];
      Q(i, d) = b.coords[i][d];
    }
  P.rowwise() -= P.colwise().mean();
  Q.rowwise() -= Q.colwise().mean();
  const Eigen::Matrix3d H = P.transpose() * Q;
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(H, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d D = Eigen::Matrix3d::Identity();
  if ((svd.matrixV() * svd.matrixU().transpose()).determinant() < 0.0) D(2, 2) = -1.0;
  const Eigen::Matrix3d R = svd.matrixV() * D * svd.matrixU().transpose();
  const Eigen::MatrixX3d diff = (P * R.transpose()) - Q;
  return std::sqrt(diff.squaredNorm() / static_cast<double>(n));
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) throw EvalError("quantile: empty data");
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

json SymmetryTolerances::to_json() const {
  return {{"r1", r1},
          {"r2_coords", r2_coords},
          {"r2_types", r2_types},
          {"r2_translation", r2_translation},
          {"r3", r3},
          {"r3_perturbation", r3_perturbation},
          {"r3_fraction", r3_fraction},
          {"r4_rmsd", r4_rmsd},
          {"r4_fraction", r4_fraction}};
}

json SymmetryReport::to_json() const {
  json q = json::object();
  for (auto [p, v] : r4_quantiles) q["q" + std::to_string(static_cast<int>(std::lround(p * 100)))] = v;
  return {{"trials", trials},
          {"r1_max_dev", r1_max_dev},
          {"r2_max_dev", r2_max_dev},
          {"r2_type_dev", r2_type_dev},
          {"r2_translation_dev", r2_translation_dev},
          {"r3_min_effect", r3_min_effect},
          {"r3_witnesses", r3_witnesses},
          {"degenerate_coupling", degenerate_coupling},
          {"r4_evaluated", r4_evaluated},
          {"r4_samples", r4_rmsd.size()},
          {"r4_rmsd_quantiles", q},
          {"r4_fraction_above", r4_fraction_above},
          {"pass", {{"r1", r1_pass}, {"r2", r2_pass}, {"r3", r3_pass}, {"r4", r4_evaluated ? json(r4_pass) : json(nullptr)}}},
          {"tolerances", tol.to_json()}};
}

namespace {

using Rot = Eigen::Matrix3d;

Rot random_rotation(num::Rng &rng) {
  Eigen::Quaterniond q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
  q.normalize();
  return q.toRotationMatrix();
}

chem::Vec3 rotated(const Rot &r, const chem::Vec3 &v, const chem::Vec3 &shift = {0, 0, 0}) {
  const Eigen::Vector3d o = r * Eigen::Vector3d(v[0], v[1], v[2]);
  return {o[0] + shift[0], o[1] + shift[1], o[2] + shift[2]};
}

chem::Pocket random_pocket(std::size_t m, num::Rng &rng) {
  chem::Pocket p;
  p.id = "probe";
  for (std::size_t i = 0; i < m; ++i) {
    Eigen::Vector3d d(rng.normal(), rng.normal(), rng.normal());
    d *= rng.uniform(3.0, 6.0) / d.norm();
    p.coords.push_back({d[0], d[1], d[2]});
    p.elements.push_back(rng.uniform_int(4));
    p.residues.push_back(rng.uniform_int(20));
    p.residue_ids.push_back(static_cast<int>(i / 4));
  }
  const auto c = p.center();
  return p.translated({-c[0], -c[1], -c[2]});
}

sched::NoisyState random_state(std::size_t n, std::size_t targets, std::size_t t, num::Rng &rng) {
  std::vector<std::size_t> types(n);
  for (auto &v : types) v = rng.uniform_int(chem::AtomVocab::kSize);
  chem::LigandGraph g(types);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (rng.bernoulli(0.3)) g.set_bond(i, j, static_cast<chem::BondType>(1 + rng.uniform_int(4)));
  sched::NoisyState s{g, {}, t};
  for (std::size_t k = 0; k < targets; ++k) {
    chem::Pose p;
    for (std::size_t i = 0; i < n; ++i) p.coords.push_back({1.5 * rng.normal(), 1.5 * rng.normal(), 1.5 * rng.normal()});
    s.poses.push_back(p);
  }
  return s;
}

std::size_t draw_between(std::size_t lo, std::size_t hi, num::Rng &rng) {
  return lo + rng.uniform_int(hi - lo + 1);
}

double max_dev(const chem::Pose &a, const chem::Pose &b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (int d = 0; d < 3; ++d) m = std::max(m, std::abs(a.coords[i][d] - b.coords[i][d]));
  return m;
}

double max_dev(const num::Tensor &a, const num::Tensor &b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

// Denoise in the callers' frames: each target is centered on its pocket,
// denoised, and shifted back.
dlcf::DenoiserOutput denoise_uncentered(dlcf::DenoiserModel &m, sched::NoisyState s,
                                        std::vector<chem::Pocket> pockets, std::size_t steps) {
  std::vector<chem::Vec3> centers;
  for (std::size_t k = 0; k < pockets.size(); ++k) {
    const auto c = pockets[k].center();
    centers.push_back(c);
    pockets[k] = pockets[k].translated({-c[0], -c[1], -c[2]});
    for (auto &x : s.poses[k].coords)
      for (int d = 0; d < 3; ++d) x[d] -= c[d];
  }
  auto out = dlcf::denoise(m, s, pockets, steps);
  for (std::size_t k = 0; k < pockets.size(); ++k)
    for (auto &x : out.x[k].coords)
      for (int d = 0; d < 3; ++d) x[d] += centers[k][d];
  return out;
}

}  // namespace

SymmetryReport verify_symmetries(dlcf::DenoiserModel &model, std::size_t steps, const SymmetryProbe &probe,
                                 const SymmetryTolerances &tol) {
  if (probe.trials < 1) throw EvalError("verify_symmetries: trials must be at least 1");
  if (model.config().targets != 2) throw EvalError("verify_symmetries: needs a two-target model");
  if (steps < 1) throw EvalError("verify_symmetries: schedule has no steps");
  if (probe.n_atoms_min < 2 || probe.n_atoms_min > probe.n_atoms_max || probe.pocket_atoms_min < 1 ||
      probe.pocket_atoms_min > probe.pocket_atoms_max)
    throw EvalError("verify_symmetries: bad probe size ranges");

  SymmetryReport rep;
  rep.tol = tol;
  rep.trials = probe.trials;
  rep.r3_min_effect = std::numeric_limits<double>::infinity();
  const num::Rng root(probe.seed);
  for (std::size_t trial = 0; trial < probe.trials; ++trial) {
    num::Rng rng = root.split(trial);
    const std::size_t n = draw_between(probe.n_atoms_min, probe.n_atoms_max, rng);
    const std::size_t t = 1 + rng.uniform_int(steps);
    std::vector<chem::Pocket> pockets{
        random_pocket(draw_between(probe.pocket_atoms_min, probe.pocket_atoms_max, rng), rng),
        random_pocket(draw_between(probe.pocket_atoms_min, probe.pocket_atoms_max, rng), rng)};
    const auto state = random_state(n, 2, t, rng);
    const auto base = dlcf::denoise(model, state, pockets, steps);

    // R1: denoise o swap == swap o denoise.
    {
      auto s = state;
      std::swap(s.poses[0], s.poses[1]);
      const std::vector<chem::Pocket> sw{pockets[1], pockets[0]};
      const auto out = dlcf::denoise(model, s, sw, steps);
      double dev = std::max(max_dev(out.x[0], base.x[1]), max_dev(out.x[1], base.x[0]));
      dev = std::max(dev, max_dev(out.atom_probs, base.atom_probs));
      if (n >= 2) dev = std::max(dev, max_dev(out.bond_probs, base.bond_probs));
      rep.r1_max_dev = std::max(rep.r1_max_dev, dev);
    }

    // R2: independent rotation per complex.
    {
      auto s = state;
      auto pk = pockets;
      std::array<Rot, 2> rot{random_rotation(rng), random_rotation(rng)};
      for (std::size_t k = 0; k < 2; ++k) {
        for (auto &x : s.poses[k].coords) x = rotated(rot[k], x);
        for (auto &x : pk[k].coords) x = rotated(rot[k], x);
      }
      const auto out = dlcf::denoise(model, s, pk, steps);
      for (std::size_t k = 0; k < 2; ++k) {
        chem::Pose expect = base.x[k];
        for (auto &x : expect.coords) x = rotated(rot[k], x);
        rep.r2_max_dev = std::max(rep.r2_max_dev, max_dev(out.x[k], expect));
      }
      double tdev = max_dev(out.atom_probs, base.atom_probs);
      if (n >= 2) tdev = std::max(tdev, max_dev(out.bond_probs, base.bond_probs));
      rep.r2_type_dev = std::max(rep.r2_type_dev, tdev);

      // Translations enter only through the centering round trip.
      auto st = state;
      auto pt = pockets;
      std::array<chem::Vec3, 2> shift{};
      for (std::size_t k = 0; k < 2; ++k) {
        for (auto &c : shift[k]) c = rng.uniform(-10.0, 10.0);
        for (auto &x : st.poses[k].coords)
          for (int d = 0; d < 3; ++d) x[d] += shift[k][d];
        pt[k] = pt[k].translated(shift[k]);
      }
      const auto ref = denoise_uncentered(model, state, pockets, steps);
      const auto moved = denoise_uncentered(model, st, pt, steps);
      for (std::size_t k = 0; k < 2; ++k) {
        chem::Pose back = moved.x[k];
        for (auto &x : back.coords)
          for (int d = 0; d < 3; ++d) x[d] -= shift[k][d];
        rep.r2_translation_dev = std::max(rep.r2_translation_dev, max_dev(back, ref.x[k]));
      }
      rep.r2_translation_dev = std::max(rep.r2_translation_dev, max_dev(moved.atom_probs, ref.atom_probs));
    }

    // R3: moving pose 2 must reach the pose-1 prediction.
    {
      auto s = state;
      for (auto &x : s.poses[1].coords) {
        Eigen::Vector3d d(rng.normal(), rng.normal(), rng.normal());
        d *= tol.r3_perturbation / d.norm();
        for (int c = 0; c < 3; ++c) x[c] += d[c];
      }
      const auto out = dlcf::denoise(model, s, pockets, steps);
      const double effect = max_dev(out.x[0], base.x[0]);
      rep.r3_min_effect = std::min(rep.r3_min_effect, effect);
      rep.r3_witnesses += effect > tol.r3;
    }
  }
  rep.r1_pass = rep.r1_max_dev < tol.r1;
  rep.r2_pass = rep.r2_max_dev < tol.r2_coords && rep.r2_type_dev < tol.r2_types &&
                rep.r2_translation_dev < tol.r2_translation;
  rep.r3_pass = static_cast<double>(rep.r3_witnesses) >= tol.r3_fraction * static_cast<double>(rep.trials);
  rep.degenerate_coupling = rep.r3_witnesses == 0;
  return rep;
}

void add_r4(SymmetryReport &report, const std::vector<sample::GeneratedSample> &samples) {
  if (samples.empty()) throw EvalError("add_r4: no samples");
  report.r4_rmsd.clear();
  std::size_t above = 0;
  for (const auto &s : samples) {
    const double r = kabsch_rmsd(s.pose1, s.pose2);
    report.r4_rmsd.push_back(r);
    above += r > report.tol.r4_rmsd;
  }
  report.r4_quantiles.clear();
  for (double q : {0.05, 0.25, 0.5, 0.75, 0.95}) report.r4_quantiles.emplace_back(q, quantile(report.r4_rmsd, q));
  report.r4_fraction_above = static_cast<double>(above) / static_cast<double>(samples.size());
  report.r4_pass = report.r4_fraction_above >= report.tol.r4_fraction;
  report.r4_evaluated = true;
}

}  // namespace dualfuse::eval
