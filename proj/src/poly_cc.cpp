#include "ccident/poly_cc.hpp"

#include <iomanip>
#include <ostream>

namespace ccident {

PolyCurve PolyCurve::for_samples(const Eigen::Ref<const Eigen::VectorXd>& z,
                                 int degree, Variable input) {
  const Domain dom = Domain::of(z);
  if (!(dom.hi > dom.lo))
    throw InvalidData("degenerate training domain: all samples equal " +
                      std::to_string(dom.lo));
  PolyCurve p;
  p.degree = degree;
  p.shifted = Eigen::VectorXd::Zero(degree + 1);
  p.a0 = dom.center();
  p.a1 = 0.5 * dom.width();
  p.domain = dom;
  p.input = input;
  return p;
}

CurveModel PolyCurve::curve() const {
  const Eigen::VectorXd c = shifted;
  const double s0 = a0, s1 = a1;
  return CurveModel(
      CurveKind::Polynomial, input,
      [c, s0, s1](double z) { return horner(c, (z - s0) / s1); }, domain);
}

namespace {

// Powers u^0 .. u^degree of every sample, one row per sample.
Eigen::MatrixXd powers(const Eigen::VectorXd& u, int degree) {
  Eigen::MatrixXd p(u.size(), degree + 1);
  p.col(0).setOnes();
  for (int j = 1; j <= degree; ++j) p.col(j) = p.col(j - 1).cwiseProduct(u);
  return p;
}

}  // namespace

PolyFit fit_poly(const Dataset& ds, ModelFamily family, int degree) {
  if (degree < 1) throw std::invalid_argument("fit_poly: degree must be >= 1");
  require_valid(ds);
  const Eigen::Index n = ds.size();
  const Eigen::VectorXd y = ds.fext - ds.xddot;
  const int m = degree + 1;

  PolyFit fit;
  fit.b = PolyCurve::for_samples(ds.x, degree, Variable::Position);
  const Eigen::VectorXd ux =
      (ds.x.array() - fit.b.a0) / fit.b.a1;

  Eigen::MatrixXd design;
  if (family == ModelFamily::PositionFriction) {
    fit.a = PolyCurve::for_samples(ds.x, degree, Variable::Position);
    const Eigen::MatrixXd px = powers(ux, degree);
    design.resize(n, 2 * m);
    design.leftCols(m) = px.array().colwise() * ds.xdot.array();
    design.rightCols(m) = px;
  } else {
    fit.a = PolyCurve::for_samples(ds.xdot, degree, Variable::Velocity);
    const Eigen::VectorXd uv = (ds.xdot.array() - fit.a.a0) / fit.a.a1;
    // f4 columns are u^j - u(0)^j so the restoring curve vanishes at x = 0.
    const double u0 = -fit.b.a0 / fit.b.a1;
    Eigen::MatrixXd px = powers(ux, degree).rightCols(degree);
    double u0j = 1;
    for (int j = 0; j < degree; ++j) {
      u0j *= u0;
      px.col(j).array() -= u0j;
    }
    design.resize(n, m + degree);
    design.leftCols(m) = powers(uv, degree);
    design.rightCols(degree) = px;
  }

  Eigen::BDCSVD<Eigen::MatrixXd> svd(design,
                                     Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(1e-12);
  const Eigen::VectorXd coef = svd.solve(y);
  fit.rank = svd.rank();
  fit.columns = design.cols();
  fit.rank_deficient = fit.rank < design.cols();
  fit.fit_residual = (design * coef - y).squaredNorm() / double(n);

  fit.a.shifted = coef.head(m);
  if (family == ModelFamily::PositionFriction) {
    fit.b.shifted = coef.tail(m);
  } else {
    fit.b.shifted.tail(degree) = coef.tail(degree);
    const double u0 = -fit.b.a0 / fit.b.a1;
    double acc = 0, u0j = 1;
    for (int j = 1; j <= degree; ++j) {
      u0j *= u0;
      acc += fit.b.shifted[j] * u0j;
    }
    fit.b.shifted[0] = -acc;
  }
  fit.model = {family, fit.a.curve(), fit.b.curve()};
  return fit;
}

void write_poly_csv(std::ostream& os, const PolyFit& fit) {
  const bool pos = fit.model.family == ModelFamily::PositionFriction;
  const char* names[2] = {pos ? "f1" : "f3", pos ? "f2" : "f4"};
  const PolyCurve* curves[2] = {&fit.a, &fit.b};
  os << "curve,basis,j,coeff\n" << std::setprecision(17);
  for (int c = 0; c < 2; ++c) {
    const Eigen::VectorXd mono = curves[c]->monomial();
    for (Eigen::Index j = 0; j < curves[c]->shifted.size(); ++j)
      os << names[c] << ",shifted," << j << ',' << curves[c]->shifted[j] << '\n';
    for (Eigen::Index j = 0; j < mono.size(); ++j)
      os << names[c] << ",monomial," << j << ',' << mono[j] << '\n';
  }
}

}  // namespace ccident
