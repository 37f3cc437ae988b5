#include "ccident/core.hpp"
#include "ccident/systems.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace ccident;

namespace {

Dataset sine_dataset(Eigen::Index n) {
  Dataset ds;
  ds.t = uniform_grid(0, 10, n);
  ds.x = ds.t.array().sin();
  ds.xdot = ds.t.array().cos();
  ds.xddot = -ds.x;
  ds.fext = Eigen::VectorXd::Zero(n);
  return ds;
}

}  // namespace

TEST_SUITE("core") {

TEST_CASE("well-formed dataset has no violations") {
  CHECK(validate_dataset(sine_dataset(500)).empty());
  CHECK_NOTHROW(require_valid(sine_dataset(500)));
}

TEST_CASE("repeated time value is reported with its index") {
  Dataset ds = sine_dataset(10);
  ds.t[4] = ds.t[3];
  const auto v = validate_dataset(ds);
  REQUIRE_FALSE(v.empty());
  CHECK(v.front() == "t not strictly increasing @ 4");
  CHECK_THROWS_AS(require_valid(ds), InvalidData);
}

TEST_CASE("non-finite entry is reported") {
  Dataset ds = sine_dataset(10);
  ds.x[3] = NAN;
  const auto v = validate_dataset(ds);
  REQUIRE(v.size() == 1);
  CHECK(v.front() == "x non-finite @ 3");
}

TEST_CASE("length mismatch and short series") {
  Dataset ds = sine_dataset(10);
  ds.fext.resize(9);
  CHECK_FALSE(validate_dataset(ds).empty());
  const Eigen::VectorXd one = Eigen::VectorXd::Zero(1);
  CHECK_FALSE(validate_dataset({one, one, one, one, one}).empty());
}

TEST_CASE("non-uniform grid is reported") {
  Dataset ds = sine_dataset(10);
  ds.t[5] += 0.01;
  CHECK_FALSE(validate_dataset(ds).empty());
}

TEST_CASE("uniform grid endpoints are exact") {
  const Eigen::VectorXd g = uniform_grid(0, 40, 500);
  CHECK(g[0] == 0.0);
  CHECK(g[499] == 40.0);
}

TEST_CASE("resampling reproduces a line") {
  Eigen::VectorXd t(5), y(5);
  t << 0, 0.3, 1.1, 1.7, 3.0;
  y = 2 * t;
  for (Eigen::Index n : {2, 7, 50}) {
    const Eigen::VectorXd r = resample_uniform(t, y, n);
    const Eigen::VectorXd g = uniform_grid(0, 3, n);
    CHECK((r - 2 * g).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("resampling with two points keeps the endpoints") {
  Eigen::VectorXd t(4), y(4);
  t << 0, 1, 2.5, 4;
  y << 3, -1, 7, 0.25;
  const Eigen::VectorXd r = resample_uniform(t, y, 2);
  CHECK(r[0] == 3.0);
  CHECK(r[1] == 0.25);
}

TEST_CASE("resampling is exact for cubics on an irregular grid") {
  const int m = 97;
  Eigen::VectorXd t(m);
  for (int i = 0; i < m; ++i) t[i] = 2.0 * i / (m - 1) + 0.01 * std::sin(3.1 * i);
  const Eigen::VectorXd y = t.array().cube();
  const Eigen::VectorXd r = resample_uniform(t, y, 500);
  const Eigen::VectorXd g = uniform_grid(t[0], t[m - 1], 500);
  CHECK((r - Eigen::VectorXd(g.array().cube())).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("resampling is idempotent on a uniform grid") {
  const Eigen::VectorXd t = uniform_grid(0, 5, 101);
  const Eigen::VectorXd y = t.array().sin();
  const Eigen::VectorXd r = resample_uniform(t, y, 101);
  CHECK((r - y).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("resampling rejects n < 2") {
  Eigen::VectorXd t(3), y(3);
  t << 0, 1, 2;
  y << 0, 1, 2;
  CHECK_THROWS_AS(resample_uniform(t, y, 1), std::invalid_argument);
}

TEST_CASE("derivatives of sin over 40 s") {
  const Eigen::VectorXd t = uniform_grid(0, 40, 500);
  const Eigen::VectorXd x = t.array().sin();
  const Derivatives d = estimate_derivatives(t, x);
  CHECK((d.xdot - Eigen::VectorXd(t.array().cos())).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("derivatives of a constant vanish") {
  const Eigen::VectorXd t = uniform_grid(0, 1, 20);
  const Derivatives d = estimate_derivatives(t, Eigen::VectorXd::Constant(20, 3.5));
  CHECK(d.xdot.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(d.xddot.cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("second derivative of t^2 is 2 in the interior") {
  const Eigen::VectorXd t = uniform_grid(0, 2, 41);
  const Derivatives d = estimate_derivatives(t, t.array().square());
  for (Eigen::Index i = 2; i < 39; ++i) CHECK(d.xddot[i] == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("interior stencil converges at fourth order") {
  auto err = [](int n) {
    const Eigen::VectorXd t = uniform_grid(0, 2, n);
    const Derivatives d = estimate_derivatives(t, Eigen::VectorXd(t.array().exp()));
    return (d.xdot - Eigen::VectorXd(t.array().exp())).segment(2, n - 4).cwiseAbs().maxCoeff();
  };
  const double e1 = err(41), e2 = err(81), e3 = err(161);
  const double slope = std::log2(e1 / e3) / 2;
  CHECK(slope >= 3.5);
  CHECK(e2 < e1);
}

TEST_CASE("derivatives need five points") {
  const Eigen::VectorXd t = uniform_grid(0, 1, 4);
  CHECK_THROWS_AS(estimate_derivatives(t, t), std::invalid_argument);
}

TEST_CASE("missing derivative columns are filled") {
  Dataset ds = sine_dataset(200);
  ds.xdot.resize(0);
  ds.xddot.resize(0);
  const Dataset full = with_estimated_derivatives(ds);
  CHECK(full.xdot.size() == 200);
  CHECK(validate_dataset(full).empty());
}

TEST_CASE("harmonic and composite forcing") {
  const ForcingSpec h = ForcingSpec::harmonic(2.0, 0.5);
  CHECK(h(1.3) == doctest::Approx(2.0 * std::cos(0.65)));
  const ForcingSpec f = ForcingSpec::fhn(2.0, 1.2, 0.064);
  const double t = 0.7;
  const double want = -0.064 * 2.0 * std::cos(1.2 * t) + 2.0 * 1.2 * std::sin(1.2 * t);
  CHECK(f(t) == doctest::Approx(want).epsilon(1e-15));
  CHECK(ForcingSpec::zero()(5.0) == 0.0);
}

TEST_CASE("linear edges apply outside the domain only") {
  const CurveModel c(CurveKind::Analytic, Variable::Position,
                     [](double z) { return z * z; }, Domain{-1, 1});
  const CurveModel e = c.with_edge_lines({2, 3, 4, 5});
  CHECK(e(0.5) == 0.25);
  CHECK(e(-2) == 2 * -2 + 3);
  CHECK(e(3) == 4 * 3 + 5);
  CHECK(e.raw(3) == 9);
  CHECK_THROWS_AS(CurveModel::zero(Variable::Position).with_edge_lines({}),
                  std::invalid_argument);
}

TEST_CASE("zero dataset with zero curves has zero residual") {
  Dataset ds;
  ds.t = uniform_grid(0, 1, 10);
  ds.x = ds.xdot = ds.xddot = ds.fext = Eigen::VectorXd::Zero(10);
  const IdentifiedModel m{ModelFamily::PositionFriction,
                          CurveModel::zero(Variable::Position),
                          CurveModel::zero(Variable::Position)};
  CHECK(residual(ds, m).maxCoeff() == 0.0);
}

TEST_CASE("residual discriminates between systems") {
  const Dataset vdp = test::default_dataset("van_der_pol");
  CHECK(residual(vdp, make_system("van_der_pol").model()).maxCoeff() < 1e-10);
  CHECK(residual(vdp, make_system("stick_slip").model()).maxCoeff() > 1e-3);
}

TEST_CASE("family and curve inputs must agree") {
  const IdentifiedModel bad{ModelFamily::PositionFriction,
                            CurveModel::zero(Variable::Velocity),
                            CurveModel::zero(Variable::Position)};
  CHECK_THROWS_AS(residual(test::default_dataset("van_der_pol"), bad),
                  std::invalid_argument);
}

TEST_CASE("dataset CSV round-trips bit for bit") {
  const Dataset ds = test::default_dataset("van_der_pol");
  std::stringstream ss;
  write_dataset_csv(ss, ds);
  CHECK(ss.str().rfind("t,x,xdot,xddot,fext\n", 0) == 0);
  const Dataset back = read_dataset_csv(ss);
  CHECK(back.t == ds.t);
  CHECK(back.x == ds.x);
  CHECK(back.xdot == ds.xdot);
  CHECK(back.xddot == ds.xddot);
  CHECK(back.fext == ds.fext);
}

TEST_CASE("bad CSV rows are rejected") {
  std::stringstream ss("t,x,xdot,xddot,fext\n0,1,2,3\n");
  CHECK_THROWS_AS(read_dataset_csv(ss), InvalidData);
}

TEST_CASE("family names") {
  CHECK(parse_family("position") == ModelFamily::PositionFriction);
  CHECK(parse_family("2") == ModelFamily::VelocityFriction);
  CHECK(family_name(ModelFamily::VelocityFriction) == "velocity");
  CHECK_THROWS_AS(parse_family("3"), std::invalid_argument);
}

}
