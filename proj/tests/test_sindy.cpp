#include "ccident/poly_cc.hpp"
#include "ccident/sindy_cc.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace ccident;

TEST_SUITE("sindy") {

TEST_CASE("library layout") {
  const auto pos = build_library(ModelFamily::PositionFriction, 10);
  const auto vel = build_library(ModelFamily::VelocityFriction, 10);
  CHECK(pos.size() == 22);
  CHECK(vel.size() == 21);
  CHECK(pos[0].render() == "xdot");
  CHECK(pos[2].render() == "x^2*xdot");
  CHECK(pos[11].render() == "1");
  CHECK(pos[12].render() == "x");
  CHECK(vel[0].render() == "1");
  CHECK(vel[3].render() == "xdot^3");
  CHECK(vel[11].render() == "x");
  CHECK(vel[11].curve == 1);
}

TEST_CASE("library columns evaluate their terms") {
  const Dataset ds = test::default_dataset("van_der_pol");
  const auto lib = build_library(ModelFamily::PositionFriction, 3);
  const Eigen::MatrixXd th = library_matrix(lib, ds);
  CHECK((th.col(2) - ds.x.cwiseAbs2().cwiseProduct(ds.xdot)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((th.col(5) - ds.x).cwiseAbs().maxCoeff() == 0.0);
}

namespace {

Eigen::MatrixXd oracle_design() {
  Eigen::MatrixXd x(200, 6);
  for (int i = 0; i < 200; ++i)
    for (int j = 0; j < 6; ++j)
      x(i, j) = std::sin(0.37 * (i + 1) * (j + 1)) +
                0.1 * std::cos(0.05 * (i + 1) * (j + 2));
  return x;
}

}  // namespace

TEST_CASE("STLSQ matches an independent reference") {
  // Reference: numpy ridge solve on the active set, same thresholding loop.
  const Eigen::MatrixXd x = oracle_design();
  Eigen::VectorXd c(6);
  c << 0, 1.5, 0, -0.7, 0.03, 0;
  Eigen::VectorXd y = x * c;
  for (int i = 0; i < 200; ++i) y[i] += 0.001 * std::sin(double(i));

  const StlsqResult r1 = stlsq(x, y, 0.01, 1e-5);
  const double w1[] = {0, 1.500026849490897, 0, -0.70000632337307955,
                       0.03000399893946781, 0};
  for (int j = 0; j < 6; ++j) CHECK(r1.coeffs[j] == doctest::Approx(w1[j]).epsilon(1e-10));
  CHECK(r1.converged);

  const StlsqResult r2 = stlsq(x, y, 0.05, 1e-5);
  const double w2[] = {0, 1.5001627936067155, 0, -0.70046209986250607, 0, 0};
  for (int j = 0; j < 6; ++j) CHECK(r2.coeffs[j] == doctest::Approx(w2[j]).epsilon(1e-10));
}

TEST_CASE("threshold that removes everything warns") {
  const Eigen::MatrixXd x = oracle_design();
  const StlsqResult r = stlsq(x, x.col(1), 100.0, 0.0);
  CHECK(r.coeffs.isZero(0));
  CHECK_FALSE(r.warning.empty());
}

TEST_CASE("surviving coefficients clear the threshold") {
  std::mt19937_64 gen(7);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::MatrixXd x = Eigen::MatrixXd::NullaryExpr(80, 12, [&] { return g(gen); });
    const Eigen::VectorXd y = Eigen::VectorXd::NullaryExpr(80, [&] { return g(gen); });
    const double lam = 0.02 * (1 + trial % 5);
    const StlsqResult r = stlsq(x, y, lam, 1e-5);
    for (Eigen::Index j = 0; j < r.coeffs.size(); ++j)
      CHECK((r.coeffs[j] == 0.0 || std::abs(r.coeffs[j]) >= lam));
  }
}

TEST_CASE("rejects mismatched shapes and negative settings") {
  const Eigen::MatrixXd x = oracle_design();
  CHECK_THROWS_AS(stlsq(x, Eigen::VectorXd::Zero(5), 0.1, 0), std::invalid_argument);
  CHECK_THROWS_AS(stlsq(x, x.col(0), -1, 0), std::invalid_argument);
}

TEST_CASE("van der Pol yields three active terms") {
  const SindyFit fit = fit_sindy(test::default_dataset("van_der_pol"),
                                 ModelFamily::PositionFriction);
  int active = 0;
  for (Eigen::Index j = 0; j < fit.result.coeffs.size(); ++j)
    active += fit.result.coeffs[j] != 0;
  CHECK(active == 3);
  CHECK(std::abs(fit.curve_a[0] + 0.501) < 1e-6);
  CHECK(std::abs(fit.curve_a[2] - 0.501) < 1e-6);
  CHECK(std::abs(fit.curve_b[1] - 1.22) < 1e-6);
}

TEST_CASE("support recovery on sparse polynomial systems") {
  struct Case {
    const char* name;
    ParamMap params;
    std::vector<double> thresholds;
  };
  // FHN restoring coefficients eps*(1-b) and eps*b/3 sit below 0.05.
  const std::vector<Case> cases = {
      {"van_der_pol", {{"mu", 1.3}, {"k", 0.8}}, {0.01, 0.05, 0.1}},
      {"van_der_pol", {{"mu", 4.0}, {"k", 1.4}}, {0.01, 0.05, 0.1}},
      {"duffing", {{"delta", 0.3}, {"alpha", -1.0}, {"beta", 1.0}}, {0.01, 0.05, 0.1}},
      {"fitzhugh_nagumo", {{"a", 0.7}, {"b", 0.8}, {"eps", 0.08}}, {0.01}},
  };
  for (const auto& c : cases) {
    const TrueSystem s = make_system(c.name, c.params);
    const Dataset ds = integrate(s.model(), s.default_forcing, s.default_init.x0,
                                 s.default_init.v0).data;
    // Truth coefficients of the library, from the closed forms.
    const PolyFit exact = fit_poly(ds, ModelFamily::PositionFriction, 3);
    const Eigen::VectorXd ta = exact.a.monomial(), tb = exact.b.monomial();
    for (double lam : c.thresholds) {
      INFO(c.name, " lambda=", lam);
      SindyParams p;
      p.threshold = lam;
      const SindyFit fit = fit_sindy(ds, ModelFamily::PositionFriction, p);
      for (int j = 0; j <= 10; ++j) {
        const double wa = j < 4 && std::abs(ta[j]) > 1e-6 ? ta[j] : 0.0;
        const double wb = j < 4 && std::abs(tb[j]) > 1e-6 ? tb[j] : 0.0;
        CHECK((fit.curve_a[j] != 0) == (wa != 0));
        CHECK((fit.curve_b[j] != 0) == (wb != 0));
        CHECK(std::abs(fit.curve_a[j] - wa) < 1e-5);
        CHECK(std::abs(fit.curve_b[j] - wb) < 1e-5);
      }
    }
  }
}

TEST_CASE("velocity family restoring curve has no constant") {
  const SindyFit fit = fit_sindy(test::default_dataset("stick_slip"),
                                 ModelFamily::VelocityFriction);
  CHECK(fit.curve_b[0] == 0.0);
  CHECK(fit.model.cc_b(0.0) == 0.0);
}

}
