//
// Project dualfuse - Copyright 2026 The dualfuse Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <random>

namespace dualfuse::num {

/// Seeded, splittable random stream. The engine is std::mt19937_64 (fully
/// specified by the standard); distributions are implemented here because
/// the standard library's are not portable across implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1).
  double uniform();
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer on [0, n).
  std::uint64_t uniform_int(std::uint64_t n);
  /// Standard normal (Box-Muller, one draw per pair of uniforms).
  double normal();
  bool bernoulli(double p) { return uniform() < p; }

  /// Independent child stream; depends only on (seed, stream, id).
  Rng split(std::uint64_t id) const;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace dualfuse::num
