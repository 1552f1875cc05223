#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lvnf/mlp.hpp"
#include "lvnf/rng.hpp"

using namespace lvnf;

namespace {

VecX random_params(const Mlp& mlp, uint64_t seed) {
  Rng rng(seed);
  VecX p(mlp.param_count());
  for (int i = 0; i < p.size(); ++i) p[i] = rng.uniform(-0.8, 0.8);
  return p;
}

}  // namespace

TEST_CASE("single linear layer: gradient of sum(out) w.r.t. W equals the input") {
  Mlp mlp({3, 2});
  VecX p = random_params(mlp, 1);
  VecX x(3);
  x << 0.5, -1.25, 2.0;
  MlpTape tape = mlp.make_tape();
  mlp.forward(p.data(), x, tape);

  VecX grad = VecX::Zero(mlp.param_count());
  mlp.backward(p.data(), tape, VecX::Ones(2), nullptr, grad.data());
  // Row-major W (2x3) then b (2): dL/dW_ij = x_j, dL/db_i = 1.
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j) CHECK(grad[i * 3 + j] == doctest::Approx(x[j]));
  CHECK(grad[6] == doctest::Approx(1.0));
  CHECK(grad[7] == doctest::Approx(1.0));
}

TEST_CASE("backward without forward throws") {
  Mlp mlp({2, 2});
  VecX p = random_params(mlp, 2);
  MlpTape tape;
  VecX grad = VecX::Zero(mlp.param_count());
  CHECK_THROWS_AS(mlp.backward(p.data(), tape, VecX::Ones(2), nullptr, grad.data()),
                  std::logic_error);
}

TEST_CASE("parameter gradients match finite differences") {
  Mlp mlp({4, 6, 5, 2});
  VecX p = random_params(mlp, 3);
  Rng rng(4);
  VecX x(4);
  for (int i = 0; i < 4; ++i) x[i] = rng.uniform(-1.0, 1.0);
  VecX w(2);
  w << 0.7, -1.3;

  auto loss = [&](const VecX& params) {
    MlpTape tape = mlp.make_tape();
    mlp.forward(params.data(), x, tape);
    return w.dot(Mlp::output(tape));
  };

  MlpTape tape = mlp.make_tape();
  mlp.forward(p.data(), x, tape);
  VecX grad = VecX::Zero(mlp.param_count());
  VecX dx;
  mlp.backward(p.data(), tape, w, &dx, grad.data());

  const double h = 1e-6;
  for (int i = 0; i < p.size(); ++i) {
    VecX pp = p, pm = p;
    pp[i] += h;
    pm[i] -= h;
    double fd = (loss(pp) - loss(pm)) / (2.0 * h);
    CHECK(grad[i] == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
  }

  // Input gradient too.
  auto loss_x = [&](const VecX& xin) {
    MlpTape t = mlp.make_tape();
    mlp.forward(p.data(), xin, t);
    return w.dot(Mlp::output(t));
  };
  for (int i = 0; i < x.size(); ++i) {
    VecX xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    double fd = (loss_x(xp) - loss_x(xm)) / (2.0 * h);
    CHECK(dx[i] == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
  }
}

TEST_CASE("jet forward tangent equals the jacobian-tangent product") {
  Mlp mlp({3, 5, 2});
  VecX p = random_params(mlp, 5);
  Rng rng(6);
  VecX x(3);
  for (int i = 0; i < 3; ++i) x[i] = rng.uniform(-1.0, 1.0);
  MatX3 Tx = MatX3::Identity(3, 3);

  MlpTape tape = mlp.make_tape();
  mlp.forward_jet(p.data(), x, Tx, tape);
  const MatX3& To = Mlp::output_tangent(tape);

  const double h = 1e-6;
  for (int k = 0; k < 3; ++k) {
    VecX xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    MlpTape tp = mlp.make_tape(), tm = mlp.make_tape();
    mlp.forward(p.data(), xp, tp);
    mlp.forward(p.data(), xm, tm);
    VecX fd = (Mlp::output(tp) - Mlp::output(tm)) / (2.0 * h);
    for (int r = 0; r < 2; ++r) CHECK(To(r, k) == doctest::Approx(fd[r]).epsilon(1e-6));
  }
}

TEST_CASE("backward_jet matches finite differences for a tangent-dependent loss") {
  // Loss = sum(out) + <A, Tout>: requires the second-order terms through tanh.
  Mlp mlp({3, 4, 4, 2});
  VecX p = random_params(mlp, 7);
  Rng rng(8);
  VecX x(3);
  for (int i = 0; i < 3; ++i) x[i] = rng.uniform(-0.5, 0.5);
  MatX3 Tx(3, 3);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) Tx(r, c) = rng.uniform(-1.0, 1.0);
  MatX3 A(2, 3);
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 3; ++c) A(r, c) = rng.uniform(-1.0, 1.0);

  auto loss = [&](const VecX& params, const VecX& xin, const MatX3& Txin) {
    MlpTape tape = mlp.make_tape();
    mlp.forward_jet(params.data(), xin, Txin, tape);
    return Mlp::output(tape).sum() + (A.array() * Mlp::output_tangent(tape).array()).sum();
  };

  MlpTape tape = mlp.make_tape();
  mlp.forward_jet(p.data(), x, Tx, tape);
  VecX grad = VecX::Zero(mlp.param_count());
  VecX dx;
  MatX3 dTx;
  mlp.backward_jet(p.data(), tape, VecX::Ones(2), A, &dx, &dTx, grad.data());

  const double h = 1e-6;
  for (int i = 0; i < p.size(); ++i) {
    VecX pp = p, pm = p;
    pp[i] += h;
    pm[i] -= h;
    double fd = (loss(pp, x, Tx) - loss(pm, x, Tx)) / (2.0 * h);
    CHECK(grad[i] == doctest::Approx(fd).epsilon(1e-5).scale(1.0));
  }
  for (int i = 0; i < 3; ++i) {
    VecX xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    double fd = (loss(p, xp, Tx) - loss(p, xm, Tx)) / (2.0 * h);
    CHECK(dx[i] == doctest::Approx(fd).epsilon(1e-5).scale(1.0));
  }
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      MatX3 Tp = Tx, Tm = Tx;
      Tp(r, c) += h;
      Tm(r, c) -= h;
      double fd = (loss(p, x, Tp) - loss(p, x, Tm)) / (2.0 * h);
      CHECK(dTx(r, c) == doctest::Approx(fd).epsilon(1e-5).scale(1.0));
    }
}

TEST_CASE("zero upstream gradient gives zero parameter gradient") {
  Mlp mlp({3, 4, 2});
  VecX p = random_params(mlp, 9);
  VecX x = VecX::Constant(3, 0.3);
  MlpTape tape = mlp.make_tape();
  mlp.forward(p.data(), x, tape);
  VecX grad = VecX::Zero(mlp.param_count());
  mlp.backward(p.data(), tape, VecX::Zero(2), nullptr, grad.data());
  CHECK(grad.cwiseAbs().maxCoeff() == 0.0);
}
