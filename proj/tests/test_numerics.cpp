//
// Project dualfuse - Copyright 2026 The dualfuse Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <functional>
#include <vector>

#include "dualfuse/numerics/archive.hpp"
#include "dualfuse/numerics/autodiff.hpp"
#include "dualfuse/numerics/gradcheck.hpp"
#include "dualfuse/numerics/nn.hpp"
#include "dualfuse/numerics/params.hpp"
#include "dualfuse/numerics/rng.hpp"

using namespace dualfuse::num;

namespace {

Tensor random_tensor(std::size_t r, std::size_t c, Rng &rng, double lo = -1.0, double hi = 1.0) {
  Tensor t = Tensor::matrix(r, c);
  for (auto &x : t.data()) x = rng.uniform(lo, hi);
  return t;
}

// sum(op(inputs) * w) for fixed random weights w, so every output entry
// contributes a distinct sensitivity.
GradCheckReport check_op(std::vector<Tensor> inputs,
                         const std::function<Var(std::vector<Var> &)> &op, Rng &rng,
                         double h = 1e-5) {
  ParamStore store;
  std::vector<ParamId> ids;
  for (std::size_t i = 0; i < inputs.size(); ++i)
    ids.push_back(store.add("in" + std::to_string(i), inputs[i]));
  Tensor weights;
  {
    Tape probe(false);
    std::vector<Var> vars;
    for (auto id : ids) vars.push_back(probe.param(store, id));
    const Tensor &out = op(vars).value();
    weights = random_tensor(out.rows(), out.cols(), rng);
  }
  LossFn fn = [&](Tape &tape) {
    std::vector<Var> vars;
    for (auto id : ids) vars.push_back(tape.param(store, id));
    Var out = op(vars);
    return sum(mul(out, tape.constant(weights)));
  };
  return finite_diff_check(fn, store, ids, h, 1e-6);
}

}  // namespace

TEST_CASE("backward: polynomial and constant") {
  ParamStore store;
  auto x = store.add("x", Tensor::scalar(3.0));
  auto unused = store.add("unused", Tensor::scalar(5.0));
  {
    Tape tape;
    Var xv = tape.param(store, x);
    tape.param(store, unused);
    tape.backward(mul(xv, xv));
  }
  CHECK(store.grad(x).item() == doctest::Approx(6.0).epsilon(1e-15));
  CHECK(store.grad(unused).item() == 0.0);

  store.zero_grad();
  {
    Tape tape;
    Var xv = tape.param(store, x);
    Var c = add(scale(xv, 0.0), tape.constant(Tensor::scalar(2.0)));
    tape.backward(c);
  }
  CHECK(store.grad(x).item() == 0.0);
}

TEST_CASE("backward: error paths") {
  ParamStore store;
  auto x = store.add("x", Tensor::from_rows({{1.0, 2.0}}));
  {
    Tape tape;
    Var xv = tape.param(store, x);
    CHECK_THROWS_AS(tape.backward(square(xv)), NumericsError);
  }
  {
    Tape tape;
    Var xv = tape.param(store, x);
    Var bad = sqrt(scale(xv, -1.0));
    CHECK_THROWS_AS(tape.backward(sum(bad)), NumericsError);
  }
}

TEST_CASE("backward: two-layer perceptron with 12 parameters matches central differences") {
  Rng rng(11);
  ParamStore store;
  Mlp mlp = Mlp::create(store, "mlp", {2}, 2, 2, rng);
  for (auto id : store.ids())
    for (auto &v : store.value(id).data()) v = rng.uniform(-1.0, 1.0);
  CHECK(store.scalar_count() == 12);
  Tensor x = Tensor::from_rows({{0.3, -0.7}, {1.1, 0.4}});
  LossFn fn = [&](Tape &tape) {
    Var in = tape.constant(x);
    std::vector<Var> blocks{in};
    return sum(square(mlp(tape, store, blocks)));
  };
  auto ids = store.ids();
  auto report = finite_diff_check(fn, store, ids, 1e-5, 1e-6);
  CHECK(report.coords_checked == 12);
  CHECK(report.max_rel_err < 1e-6);
  CHECK(report.pass);
}

TEST_CASE("finite_diff_check: scalar cases and determinism guard") {
  ParamStore store;
  auto x = store.add("x", Tensor::scalar(2.0));
  std::vector<ParamId> ids{x};
  LossFn cube = [&](Tape &t) {
    Var v = t.param(store, x);
    return mul(mul(v, v), v);
  };
  auto r = finite_diff_check(cube, store, ids, 1e-5, 1e-8);
  CHECK(r.max_rel_err < 1e-8);

  store.value(x)[0] = 0.0;
  LossFn sq = [&](Tape &t) {
    Var v = t.param(store, x);
    return mul(v, v);
  };
  r = finite_diff_check(sq, store, ids, 1e-5, 1e-8);
  CHECK(r.max_abs_err < 1e-9);

  int calls = 0;
  LossFn flaky = [&](Tape &t) {
    ++calls;
    return add_scalar(t.param(store, x), static_cast<double>(calls));
  };
  CHECK_THROWS_AS(finite_diff_check(flaky, store, ids, 1e-5, 1e-8), NumericsError);
  CHECK_THROWS_AS(finite_diff_check(sq, store, ids, 0.0, 1e-8), NumericsError);
}

TEST_CASE("every differentiable operation matches central differences") {
  Rng rng(2024);
  auto A = [&] { return random_tensor(3, 4, rng); };
  auto pos = [&] { return random_tensor(3, 4, rng, 0.5, 2.0); };

  CHECK(check_op({A(), random_tensor(4, 2, rng)}, [](auto &v) { return matmul(v[0], v[1]); }, rng).pass);
  CHECK(check_op({A(), A()}, [](auto &v) { return add(v[0], v[1]); }, rng).pass);
  CHECK(check_op({A(), A()}, [](auto &v) { return sub(v[0], v[1]); }, rng).pass);
  CHECK(check_op({A(), A()}, [](auto &v) { return mul(v[0], v[1]); }, rng).pass);
  CHECK(check_op({A(), random_tensor(1, 4, rng)}, [](auto &v) { return add_row(v[0], v[1]); }, rng).pass);
  CHECK(check_op({A(), random_tensor(3, 1, rng)}, [](auto &v) { return mul_col(v[0], v[1]); }, rng).pass);
  CHECK(check_op({A()}, [](auto &v) { return scale(v[0], -1.7); }, rng).pass);
  CHECK(check_op({A()}, [](auto &v) { return add_scalar(v[0], 0.3); }, rng).pass);
  CHECK(check_op({A()}, [](auto &v) { return silu(v[0]); }, rng).pass);
  CHECK(check_op({A()}, [](auto &v) { return square(v[0]); }, rng).pass);
  CHECK(check_op({pos()}, [](auto &v) { return abs(v[0]); }, rng).pass);
  CHECK(check_op({pos()}, [](auto &v) { return sqrt(v[0]); }, rng).pass);
  CHECK(check_op({pos()}, [](auto &v) { return reciprocal(v[0]); }, rng).pass);
  CHECK(check_op({pos()}, [](auto &v) { return log_floor(v[0], 1e-30); }, rng).pass);
  CHECK(check_op({A()}, [](auto &v) { return softmax_rows(v[0]); }, rng).pass);
  CHECK(check_op({pos()}, [](auto &v) { return row_normalize(v[0]); }, rng).pass);
  CHECK(check_op({A(), random_tensor(3, 2, rng)},
                 [](auto &v) { return concat_cols(std::span<const Var>(v)); }, rng)
            .pass);
  CHECK(check_op({A()}, [](auto &v) { return slice_cols(v[0], 1, 3); }, rng).pass);
  const std::vector<std::size_t> idx{2, 0, 2, 1, 0};
  CHECK(check_op({A()}, [&](auto &v) { return gather_rows(v[0], idx); }, rng).pass);
  CHECK(check_op({random_tensor(5, 4, rng)}, [&](auto &v) { return scatter_add_rows(v[0], idx, 3); }, rng).pass);
  CHECK(check_op({A()}, [](auto &v) { return sum(v[0]); }, rng).pass);
  CHECK(check_op({A()}, [](auto &v) { return mean(v[0]); }, rng).pass);
  CHECK(check_op({A()}, [](auto &v) { return row_sum(v[0]); }, rng).pass);
  CHECK(check_op({A()}, [](auto &v) { return sort_rows(v[0]); }, rng).pass);
  const std::vector<double> centers{0.0, 0.5, 1.0, 2.0};
  CHECK(check_op({random_tensor(6, 1, rng, 0.0, 2.5)},
                 [&](auto &v) { return rbf(v[0], centers, 1.3); }, rng)
            .pass);
}

TEST_CASE("adam_step") {
  AdamConfig cfg{0.1, 0.9, 0.999, 1e-8};
  SUBCASE("zero gradient leaves a fresh parameter unchanged") {
    ParamStore s;
    auto p = s.add("p", Tensor::from_rows({{1.5, -2.0}}));
    adam_step(s, cfg);
    CHECK(s.value(p)(0, 0) == 1.5);
    CHECK(s.value(p)(0, 1) == -2.0);
  }
  SUBCASE("bias correction makes the first step about lr") {
    ParamStore s;
    auto p = s.add("p", Tensor::scalar(0.0));
    s.grad(p)[0] = 1.0;
    adam_step(s, cfg);
    // m = 0.1, v = 0.001, mhat = vhat = 1 -> step = lr / (1 + eps)
    CHECK(s.value(p).item() == doctest::Approx(-0.1 / (1.0 + 1e-8)).epsilon(1e-14));
    CHECK(s.grad(p).item() == 0.0);
    const double m1 = adam_first_moment(s, p).item();
    adam_step(s, cfg);
    const double m2 = adam_first_moment(s, p).item();
    adam_step(s, cfg);
    const double m3 = adam_first_moment(s, p).item();
    CHECK(m1 == doctest::Approx(0.1));
    CHECK(m2 < m1);
    CHECK(m3 < m2);
    CHECK(m3 > 0.0);
  }
  SUBCASE("non-positive learning rate") {
    ParamStore s;
    s.add("p", Tensor::scalar(0.0));
    CHECK_THROWS_AS(adam_step(s, AdamConfig{0.0}), NumericsError);
  }
}

TEST_CASE("rng streams are reproducible and splittable") {
  Rng a(42), b(42), c(43);
  std::vector<double> xa, xb, xc;
  for (int i = 0; i < 100; ++i) {
    xa.push_back(a.normal());
    xb.push_back(b.normal());
    xc.push_back(c.normal());
  }
  CHECK(xa == xb);
  CHECK(xa != xc);
  Rng s1 = Rng(42).split(1), s1b = Rng(42).split(1), s2 = Rng(42).split(2);
  CHECK(s1.next_u64() == s1b.next_u64());
  CHECK(Rng(42).split(1).next_u64() != s2.next_u64());
  Rng u(5);
  for (int i = 0; i < 1000; ++i) {
    const double x = u.uniform();
    CHECK((x >= 0.0 && x < 1.0));
    CHECK(u.uniform_int(7) < 7);
  }
}

TEST_CASE("tensor archive round trip") {
  TensorArchive a;
  a.header_json = R"({"model":{"layers":3}})";
  a.tensors.emplace_back("w", Tensor::from_rows({{1.0, -0.5}, {1e-300, 3.25}}));
  a.tensors.emplace_back("b", Tensor::scalar(0.1));
  const auto path = std::filesystem::temp_directory_path() / "dualfuse_archive_test.ckpt";
  write_archive(path, a);
  auto back = read_archive(path);
  CHECK(back.header_json == a.header_json);
  REQUIRE(back.tensors.size() == 2);
  CHECK(back.get("w") == a.tensors[0].second);
  CHECK(back.get("b").item() == 0.1);
  CHECK_THROWS_AS(back.get("missing"), NumericsError);
  std::filesystem::remove(path);
}
