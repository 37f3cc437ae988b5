#include "ccident/nn_cc.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace ccident;

namespace {

Dataset head(const Dataset& ds, Eigen::Index n) {
  return {ds.t.head(n), ds.x.head(n), ds.xdot.head(n), ds.xddot.head(n),
          ds.fext.head(n)};
}

// Single affine layer z -> w z + b.
Net affine(double w, double b) {
  Net n({1, 1}, Activation::ReLU);
  n.weight(0)(0, 0) = w;
  n.bias(0)[0] = b;
  return n;
}

}  // namespace

TEST_SUITE("nn") {

TEST_CASE("activation names round-trip") {
  CHECK(all_activations().size() == 10);
  for (Activation a : all_activations())
    CHECK(parse_activation(activation_name(a)) == a);
  CHECK_THROWS_AS(parse_activation("swish2"), std::invalid_argument);
}

TEST_CASE("initialization is seeded and bounded") {
  const auto w = mlp_widths(100, 2);
  const Net a = Net::init(w, Activation::ReLU, 5);
  const Net b = Net::init(w, Activation::ReLU, 5);
  const Net c = Net::init(w, Activation::ReLU, 6);
  CHECK(a.parameter_count() == (100 + 100) + (100 * 100 + 100) + (100 + 1));
  CHECK(a.flatten() == b.flatten());
  CHECK(a.flatten() != c.flatten());
  for (std::size_t l = 0; l < a.layers(); ++l) {
    const double bound = std::sqrt(6.0 / double(a.weight(l).cols()));
    CHECK(a.weight(l).cwiseAbs().maxCoeff() <= bound);
    CHECK(a.bias(l).isZero(0));
  }
}

TEST_CASE("zero network is zero everywhere") {
  const Net n(mlp_widths(7, 3), Activation::Sigmoid);
  for (double z : {-3.0, 0.0, 2.5}) CHECK(n(z) == 0.0);
}

TEST_CASE("hand-built ReLU unit") {
  Net n({1, 1, 1}, Activation::ReLU);
  n.weight(0)(0, 0) = 2;
  n.bias(0)[0] = -1;
  n.weight(1)(0, 0) = 3;
  n.bias(1)[0] = 0.5;
  CHECK(n(0.0) == 0.5);
  CHECK(n(1.0) == 3.5);
  CHECK(n(0.25) == 0.5);
}

TEST_CASE("batched forward equals per-sample evaluation") {
  for (Activation act : all_activations()) {
    INFO(activation_name(act));
    const Net n = Net::init(mlp_widths(16, 2), act, 3);
    const Eigen::RowVectorXd zs = Eigen::RowVectorXd::LinSpaced(41, -2, 2);
    const Eigen::RowVectorXd out = n.forward(zs);
    for (Eigen::Index i = 0; i < zs.size(); ++i)
      CHECK(std::abs(out[i] - n(zs[i])) < 1e-12);
  }
}

TEST_CASE("analytic gradients match finite differences") {
  const Dataset ds = head(test::default_dataset("van_der_pol"), 50);
  for (ModelFamily fam : {ModelFamily::PositionFriction, ModelFamily::VelocityFriction}) {
    INFO(family_name(fam));
    Net na = Net::init(mlp_widths(5, 2), Activation::Tanh, 1);
    Net nb = Net::init(mlp_widths(5, 2), Activation::Tanh, 2);
    // Nonzero biases so their gradients are exercised away from zero.
    for (std::size_t l = 0; l < na.layers(); ++l) {
      na.bias(l).setConstant(0.1);
      nb.bias(l).setConstant(-0.2);
    }
    const double lc = 0.3;
    const LossGrad g = loss_and_grads(na, nb, ds, fam, lc);
    const double h = 1e-6;
    for (Net* net : {&na, &nb}) {
      const Eigen::VectorXd analytic = (net == &na ? g.grad_a : g.grad_b).flatten();
      const Eigen::VectorXd p0 = net->flatten();
      for (Eigen::Index k = 0; k < p0.size(); ++k) {
        Eigen::VectorXd p = p0;
        p[k] += h;
        net->unflatten(p);
        const double up = loss_and_grads(na, nb, ds, fam, lc).loss;
        p[k] = p0[k] - h;
        net->unflatten(p);
        const double dn = loss_and_grads(na, nb, ds, fam, lc).loss;
        net->unflatten(p0);
        const double fd = (up - dn) / (2 * h);
        CHECK(std::abs(fd - analytic[k]) < 1e-6 * (1 + std::abs(fd)));
      }
    }
  }
}

TEST_CASE("in-place loss agrees with the returning overload") {
  const Dataset ds = test::default_dataset("stick_slip");
  const Net na = Net::init(mlp_widths(12, 2), Activation::ReLU, 8);
  const Net nb = Net::init(mlp_widths(12, 2), Activation::ReLU, 9);
  const LossGrad ref = loss_and_grads(na, nb, ds, ModelFamily::VelocityFriction, 0.01);
  LossGrad out{0, 0, Net(na.widths(), na.activation()), Net(nb.widths(), nb.activation())};
  LossWorkspace ws;
  for (int rep = 0; rep < 2; ++rep) {
    loss_and_grads(na, nb, ds, ModelFamily::VelocityFriction, 0.01, out, ws);
    CHECK(out.loss == ref.loss);
    CHECK(out.grad_a.flatten() == ref.grad_a.flatten());
    CHECK(out.grad_b.flatten() == ref.grad_b.flatten());
  }
}

TEST_CASE("exact curves give zero loss") {
  const Dataset ds = test::dataset_of(test::linear_oscillator(0.3, 2.0));
  const LossGrad g = loss_and_grads(affine(0.3, 0), affine(2.0, 0), ds,
                                    ModelFamily::VelocityFriction, 0.01);
  CHECK(g.loss < 1e-20);
}

TEST_CASE("zero networks leave the forcing mismatch") {
  const Dataset ds = test::default_dataset("van_der_pol");
  const Net z(mlp_widths(4, 1), Activation::ReLU);
  const LossGrad g = loss_and_grads(z, z, ds, ModelFamily::PositionFriction, 0.01);
  CHECK(g.loss == doctest::Approx((ds.xddot - ds.fext).squaredNorm() / 500.0).epsilon(1e-14));
  CHECK(g.loss == g.data_loss);
}

TEST_CASE("gauge penalty only applies to the velocity family") {
  const Dataset ds = test::dataset_of(test::linear_oscillator(0.3, 2.0));
  const LossGrad g = loss_and_grads(affine(0.3, 0), affine(2.0, 0.5), ds,
                                    ModelFamily::VelocityFriction, 0.1);
  CHECK(g.loss - g.data_loss == doctest::Approx(0.1 * 0.25));
  const LossGrad p = loss_and_grads(affine(0.3, 0), affine(2.0, 0.5), ds,
                                    ModelFamily::PositionFriction, 0.1);
  CHECK(p.loss == p.data_loss);
}

TEST_CASE("edge lines") {
  const EdgeLines lin =
      fit_edge_extrapolation([](double z) { return 2 * z + 1; }, {-1, 3});
  CHECK(lin.lo_slope == doctest::Approx(2));
  CHECK(lin.hi_slope == doctest::Approx(2));
  CHECK(lin.lo_intercept == doctest::Approx(1));
  CHECK(lin.hi_intercept == doctest::Approx(1));

  // Least-squares line through z^2 at 21 points on [0.95, 1].
  const EdgeLines q = fit_edge_extrapolation([](double z) { return z * z; }, {0, 1});
  CHECK(q.hi_slope == doctest::Approx(1.95).epsilon(1e-12));
  CHECK(q.hi_intercept == doctest::Approx(-0.950625 + 0.0025 * 22 / 240).epsilon(1e-12));

  CHECK_THROWS_AS(fit_edge_extrapolation([](double z) { return z; }, {1, 1}),
                  std::invalid_argument);
}

TEST_CASE("neural curves extrapolate with their edge lines") {
  auto na = std::make_shared<const Net>(Net::init(mlp_widths(6, 1), Activation::Tanh, 4));
  auto nb = std::make_shared<const Net>(Net::init(mlp_widths(6, 1), Activation::Tanh, 5));
  const Domain d{-1, 1};
  const EdgeLines ea = fit_edge_extrapolation([&](double z) { return (*na)(z); }, d);
  const IdentifiedModel m = neural_model(ModelFamily::PositionFriction, na, nb, d, d, ea,
                                         fit_edge_extrapolation([&](double z) { return (*nb)(z); }, d));
  CHECK(m.cc_a(0.3) == (*na)(0.3));
  CHECK(m.cc_a(5.0) == doctest::Approx(ea.hi_slope * 5 + ea.hi_intercept));
  CHECK(m.cc_a(-4.0) == doctest::Approx(ea.lo_slope * -4 + ea.lo_intercept));
  CHECK(m.cc_a.kind() == CurveKind::Neural);
}

namespace {

TrainConfig small_config() {
  TrainConfig c;
  c.neurons = 8;
  c.hidden_layers = 2;
  c.max_epochs = 60;
  c.seed = 11;
  return c;
}

}  // namespace

TEST_CASE("training is deterministic and lowers the loss") {
  const Dataset ds = test::default_dataset("van_der_pol");
  const NeuralFit a = train(ds, ModelFamily::PositionFriction, small_config());
  const NeuralFit b = train(ds, ModelFamily::PositionFriction, small_config());
  CHECK(a.final_loss == b.final_loss);
  CHECK(a.net_a->flatten() == b.net_a->flatten());
  CHECK(a.epochs == 60);
  REQUIRE(a.history.size() >= 2);
  CHECK(a.history.front().first == 0);
  CHECK(a.history.back().second == a.final_loss);
  CHECK(a.final_loss < a.history.front().second);
}

TEST_CASE("export round-trips bit for bit") {
  const Dataset ds = test::default_dataset("stick_slip");
  TrainConfig cfg = small_config();
  cfg.activation = Activation::SiLU;
  const NeuralFit fit = train(ds, ModelFamily::VelocityFriction, cfg);
  std::stringstream s1;
  write_neural_model(s1, fit);
  const NeuralFit back = read_neural_model(s1);
  CHECK(back.net_a->flatten() == fit.net_a->flatten());
  CHECK(back.net_b->flatten() == fit.net_b->flatten());
  CHECK(back.model.family == ModelFamily::VelocityFriction);
  CHECK(back.config.activation == Activation::SiLU);
  for (double z : {-3.0, -0.1, 0.0, 0.4, 2.0}) {
    CHECK(back.model.cc_a(z) == fit.model.cc_a(z));
    CHECK(back.model.cc_b(z) == fit.model.cc_b(z));
  }
  std::stringstream s2;
  write_neural_model(s2, back);
  CHECK(s1.str() == s2.str());
}

TEST_CASE("malformed export is rejected") {
  std::stringstream s("nncc v2 family=1\n");
  CHECK_THROWS(read_neural_model(s));
}

TEST_CASE("loss threshold stops training") {
  const Dataset ds = test::default_dataset("van_der_pol");
  TrainConfig cfg = small_config();
  cfg.loss_stop = 1e10;
  const NeuralFit fit = train(ds, ModelFamily::PositionFriction, cfg);
  CHECK(fit.epochs == 0);
  CHECK(fit.final_loss <= 1e10);
}

TEST_CASE("exploding training reports the epoch") {
  const Dataset ds = test::default_dataset("van_der_pol");
  TrainConfig cfg = small_config();
  cfg.learning_rate = 1e100;
  try {
    train(ds, ModelFamily::PositionFriction, cfg);
    FAIL("expected TrainingFailure");
  } catch (const TrainingFailure& e) {
    CHECK(e.epoch() > 0);
    CHECK(e.epoch() < 60);
  }
}

}
