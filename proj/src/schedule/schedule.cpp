//
// Project dualfuse - Copyright 2026 The dualfuse Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "dualfuse/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace dualfuse::sched {

namespace {

constexpr double kCosineOffset = 0.008;
constexpr double kClipLo = 1e-5;
constexpr double kClipHi = 1.0 - 1e-5;
// Applied where clipping would otherwise leave a plateau at the floor.
constexpr double kTailDecay = 0.999;

double cosine_f(double u) {
  const double a = (u + kCosineOffset) / (1.0 + kCosineOffset) * std::numbers::pi / 2.0;
  const double c = std::cos(a);
  return c * c;
}

std::vector<double> cosine_curve(std::size_t steps, std::size_t time_factor) {
  const double f0 = cosine_f(0.0);
  std::vector<double> out(steps + 1);
  out[0] = 1.0;
  for (std::size_t t = 1; t <= steps; ++t) {
    const std::size_t tt = std::min(time_factor * t, steps);
    double v = std::clamp(cosine_f(static_cast<double>(tt) / static_cast<double>(steps)) / f0,
                          kClipLo, kClipHi);
    if (v >= out[t - 1]) v = out[t - 1] * kTailDecay;
    out[t] = v;
  }
  return out;
}

std::size_t check_t(std::size_t t, const NoiseSchedule &s) {
  if (t > s.steps())
    throw ScheduleError("timestep " + std::to_string(t) + " outside [0, " +
                        std::to_string(s.steps()) + "]");
  return t;
}

std::size_t absorbing_index() { return static_cast<std::size_t>(chem::BondType::kNone); }

}  // namespace

ScheduleKind schedule_kind_from_string(const std::string &s) {
  if (s == "cosine") return ScheduleKind::kCosine;
  throw ScheduleError("unknown schedule kind '" + s + "'");
}

std::string to_string(ScheduleKind) { return "cosine"; }

NoiseSchedule NoiseSchedule::make(std::size_t steps, ScheduleKind kind) {
  if (steps < 2) throw ScheduleError("schedule needs T >= 2, got " + std::to_string(steps));
  NoiseSchedule s;
  s.kind_ = kind;
  s.pos_ = cosine_curve(steps, 1);
  s.atom_ = s.pos_;
  s.bond_ = cosine_curve(steps, 2);
  s.validate();
  return s;
}

NoiseSchedule NoiseSchedule::from_values(ScheduleKind kind, std::vector<double> pos,
                                         std::vector<double> atom, std::vector<double> bond) {
  NoiseSchedule s;
  s.kind_ = kind;
  s.pos_ = std::move(pos);
  s.atom_ = std::move(atom);
  s.bond_ = std::move(bond);
  s.validate();
  return s;
}

void NoiseSchedule::validate() const {
  if (pos_.size() < 3 || atom_.size() != pos_.size() || bond_.size() != pos_.size())
    throw ScheduleError("schedule channels must share length T + 1 with T >= 2");
  const std::size_t T = steps();
  for (const auto *ch : {&pos_, &atom_, &bond_}) {
    if ((*ch)[0] != 1.0) throw ScheduleError("abar_0 must be exactly 1");
    for (std::size_t t = 1; t <= T; ++t) {
      if (!((*ch)[t] < (*ch)[t - 1]) || !((*ch)[t] > 0.0))
        throw ScheduleError("abar not strictly decreasing and positive at t=" +
                            std::to_string(t));
    }
  }
  for (std::size_t t = 0; t <= T; ++t)
    if (bond_[t] > atom_[t]) throw ScheduleError("bond channel not absorbed first at t=" +
                                                 std::to_string(t));
  if (pos_[T] > 1e-4) throw ScheduleError("abar_pos[T] above 1e-4");
  const auto t60 = static_cast<std::size_t>(std::ceil(0.6 * static_cast<double>(T)));
  if (bond_[t60] > 1e-3) throw ScheduleError("abar_bond[ceil(0.6T)] above 1e-3");
}

const std::vector<double> &NoiseSchedule::alpha_bars(Channel c) const {
  switch (c) {
    case Channel::kPosition: return pos_;
    case Channel::kAtom: return atom_;
    case Channel::kBond: return bond_;
  }
  return pos_;
}

double NoiseSchedule::alpha_bar(Channel c, std::size_t t) const {
  return alpha_bars(c)[check_t(t, *this)];
}

double NoiseSchedule::alpha(Channel c, std::size_t t) const {
  if (t == 0) throw ScheduleError("alpha_t is defined for t >= 1");
  const auto &a = alpha_bars(c);
  check_t(t, *this);
  return a[t] / a[t - 1];
}

nlohmann::json NoiseSchedule::to_json() const {
  return {{"kind", to_string(kind_)},
          {"steps", steps()},
          {"abar_pos", pos_},
          {"abar_atom", atom_},
          {"abar_bond", bond_}};
}

NoiseSchedule NoiseSchedule::from_json(const nlohmann::json &j) {
  try {
    return from_values(schedule_kind_from_string(j.at("kind").get<std::string>()),
                       j.at("abar_pos").get<std::vector<double>>(),
                       j.at("abar_atom").get<std::vector<double>>(),
                       j.at("abar_bond").get<std::vector<double>>());
  } catch (const nlohmann::json::exception &e) {
    throw ScheduleError(std::string("malformed schedule: ") + e.what());
  }
}

// ---- states -------------------------------------------------------------------

NoisyState clean_state(const chem::LigandGraph &g, std::vector<chem::Pose> poses) {
  for (const auto &p : poses)
    if (p.coords.size() != g.n_atoms()) throw ScheduleError("pose size does not match ligand");
  return NoisyState{g, std::move(poses), 0};
}

NoisyState forward_sample(const NoisyState &clean, std::size_t t, const NoiseSchedule &sched,
                          num::Rng &rng) {
  if (t < 1 || t > sched.steps())
    throw ScheduleError("forward_sample: t=" + std::to_string(t) + " outside [1, T]");
  if (clean.t != 0) throw ScheduleError("forward_sample expects a clean (t = 0) state");
  const num::Rng base(rng.next_u64());
  num::Rng cat = base.split(0);

  NoisyState out = clean;
  out.t = t;
  const double ap = sched.alpha_bar(Channel::kPosition, t);
  const double sa = std::sqrt(ap), sn = std::sqrt(1.0 - ap);
  for (std::size_t k = 0; k < out.poses.size(); ++k) {
    num::Rng r = base.split(k + 1);
    for (auto &x : out.poses[k].coords)
      for (auto &c : x) c = sa * c + sn * r.normal();
  }

  const double aa = sched.alpha_bar(Channel::kAtom, t);
  const std::size_t n = out.graph.n_atoms();
  for (std::size_t i = 0; i < n; ++i) {
    if (!cat.bernoulli(aa)) out.graph.set_atom_type(i, cat.uniform_int(chem::AtomVocab::kSize));
  }
  const double ab = sched.alpha_bar(Channel::kBond, t);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (!cat.bernoulli(ab)) out.graph.set_bond(i, j, chem::BondType::kNone);
  return out;
}

NoisyState sample_base(std::size_t n_atoms, std::size_t n_targets, const NoiseSchedule &sched,
                       num::Rng &rng) {
  if (n_atoms < 1) throw ScheduleError("sample_base needs n_atoms >= 1");
  const num::Rng base(rng.next_u64());
  num::Rng cat = base.split(0);
  std::vector<std::size_t> types(n_atoms);
  for (auto &v : types) v = cat.uniform_int(chem::AtomVocab::kSize);
  NoisyState s{chem::LigandGraph(std::move(types)), {}, sched.steps()};
  for (std::size_t k = 0; k < n_targets; ++k) {
    num::Rng r = base.split(k + 1);
    chem::Pose p;
    p.coords.resize(n_atoms);
    for (auto &x : p.coords)
      for (auto &c : x) c = r.normal();
    s.poses.push_back(std::move(p));
  }
  return s;
}

// ---- transitions --------------------------------------------------------------

namespace {

// Kernel with keep-probability a: uniform mixing or absorption into `none`.
std::vector<std::vector<double>> kernel(Channel c, double a, std::size_t K) {
  std::vector<std::vector<double>> Q(K, std::vector<double>(K, 0.0));
  for (std::size_t i = 0; i < K; ++i) {
    Q[i][i] += a;
    if (c == Channel::kBond) {
      Q[i][absorbing_index()] += 1.0 - a;
    } else {
      for (std::size_t j = 0; j < K; ++j) Q[i][j] += (1.0 - a) / static_cast<double>(K);
    }
  }
  return Q;
}

void check_categorical(Channel c, std::size_t K) {
  if (c == Channel::kPosition) throw ScheduleError("position channel is not categorical");
  if (K < 1 || (c == Channel::kBond && K <= absorbing_index()))
    throw ScheduleError("too few categories for channel");
}

}  // namespace

std::vector<std::vector<double>> one_step_matrix(Channel c, std::size_t t, std::size_t K,
                                                 const NoiseSchedule &sched) {
  check_categorical(c, K);
  return kernel(c, sched.alpha(c, t), K);
}

std::vector<std::vector<double>> marginal_matrix(Channel c, std::size_t t, std::size_t K,
                                                 const NoiseSchedule &sched) {
  check_categorical(c, K);
  return kernel(c, sched.alpha_bar(c, t), K);
}

std::vector<double> likelihood_factors(std::size_t x_t, std::size_t K, std::size_t t, Channel c,
                                       const NoiseSchedule &sched) {
  check_categorical(c, K);
  if (x_t >= K) throw ScheduleError("observed category out of range");
  const double a = sched.alpha(c, t);
  std::vector<double> f(K);
  for (std::size_t j = 0; j < K; ++j) {
    double v = j == x_t ? a : 0.0;
    if (c == Channel::kBond)
      v += x_t == absorbing_index() ? 1.0 - a : 0.0;
    else
      v += (1.0 - a) / static_cast<double>(K);
    f[j] = v;
  }
  return f;
}

std::vector<double> categorical_posterior(std::size_t x_t, const std::vector<double> &x0_hat,
                                          std::size_t t, Channel c, const NoiseSchedule &sched) {
  const std::size_t K = x0_hat.size();
  double mass = 0.0;
  for (double p : x0_hat) {
    if (!(p >= 0.0)) throw ScheduleError("x0_hat has a negative or NaN entry");
    mass += p;
  }
  if (std::abs(mass - 1.0) > 1e-9) throw ScheduleError("x0_hat does not sum to 1");
  const auto f = likelihood_factors(x_t, K, t, c, sched);
  const double ab = sched.alpha_bar(c, t - 1);
  std::vector<double> post(K);
  double z = 0.0;
  for (std::size_t j = 0; j < K; ++j) {
    double prior = ab * x0_hat[j];
    if (c == Channel::kBond)
      prior += j == absorbing_index() ? 1.0 - ab : 0.0;
    else
      prior += (1.0 - ab) / static_cast<double>(K);
    post[j] = f[j] * prior;
    z += post[j];
  }
  if (!(z > 0.0)) throw ScheduleError("categorical posterior has zero mass; inputs inconsistent");
  for (auto &p : post) p /= z;
  return post;
}

GaussianPosterior gaussian_posterior(std::size_t t, const NoiseSchedule &sched) {
  if (t < 1 || t > sched.steps()) throw ScheduleError("gaussian_posterior: t outside [1, T]");
  const double abar_t = sched.alpha_bar(Channel::kPosition, t);
  const double abar_p = sched.alpha_bar(Channel::kPosition, t - 1);
  const double a = sched.alpha(Channel::kPosition, t);
  const double b = 1.0 - a;
  const double denom = 1.0 - abar_t;
  return {std::sqrt(abar_p) * b / denom, std::sqrt(a) * (1.0 - abar_p) / denom,
          b * (1.0 - abar_p) / denom};
}

std::pair<chem::Pose, double> gaussian_posterior(const chem::Pose &x_t, const chem::Pose &x0_hat,
                                                 std::size_t t, const NoiseSchedule &sched) {
  if (x_t.coords.size() != x0_hat.coords.size())
    throw ScheduleError("gaussian_posterior: pose size mismatch");
  const auto g = gaussian_posterior(t, sched);
  chem::Pose mean = x_t;
  for (std::size_t i = 0; i < mean.coords.size(); ++i)
    for (std::size_t d = 0; d < 3; ++d)
      mean.coords[i][d] = g.coef_x0 * x0_hat.coords[i][d] + g.coef_xt * x_t.coords[i][d];
  return {std::move(mean), g.variance};
}

}  // namespace dualfuse::sched
