#include "ccident/sindy_cc.hpp"

#include "ccident/poly_cc.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

namespace ccident {

double LibraryTerm::eval(double x, double v) const {
  const double base = var == Variable::Position ? x : v;
  double p = 1;
  for (int i = 0; i < power; ++i) p *= base;
  return times_xdot ? p * v : p;
}

std::string LibraryTerm::render() const {
  const std::string name = var == Variable::Position ? "x" : "xdot";
  std::string s;
  if (power == 1) s = name;
  else if (power > 1) s = name + "^" + std::to_string(power);
  if (times_xdot) return s.empty() ? "xdot" : s + "*xdot";
  return s.empty() ? "1" : s;
}

std::vector<LibraryTerm> build_library(ModelFamily family, int degree) {
  if (degree < 1) throw std::invalid_argument("build_library: degree must be >= 1");
  std::vector<LibraryTerm> lib;
  if (family == ModelFamily::PositionFriction) {
    for (int j = 0; j <= degree; ++j)
      lib.push_back({0, j, true, Variable::Position});
    for (int j = 0; j <= degree; ++j)
      lib.push_back({1, j, false, Variable::Position});
  } else {
    for (int j = 0; j <= degree; ++j)
      lib.push_back({0, j, false, Variable::Velocity});
    for (int j = 1; j <= degree; ++j)
      lib.push_back({1, j, false, Variable::Position});
  }
  return lib;
}

Eigen::MatrixXd library_matrix(const std::vector<LibraryTerm>& lib,
                               const Dataset& ds) {
  Eigen::MatrixXd theta(ds.size(), Eigen::Index(lib.size()));
  for (std::size_t c = 0; c < lib.size(); ++c)
    for (Eigen::Index i = 0; i < ds.size(); ++i)
      theta(i, Eigen::Index(c)) = lib[c].eval(ds.x[i], ds.xdot[i]);
  return theta;
}

namespace {

// argmin |A c - y|^2 + ridge |c|^2 over the active columns.
Eigen::VectorXd ridge_solve(const Eigen::Ref<const Eigen::MatrixXd>& theta,
                            const Eigen::Ref<const Eigen::VectorXd>& y,
                            const std::vector<Eigen::Index>& active,
                            double ridge) {
  const Eigen::Index n = theta.rows(), k = Eigen::Index(active.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n + k, k);
  for (Eigen::Index j = 0; j < k; ++j) a.col(j).head(n) = theta.col(active[std::size_t(j)]);
  a.bottomRows(k).diagonal().setConstant(std::sqrt(ridge));
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + k);
  rhs.head(n) = y;
  const Eigen::VectorXd sol = a.colPivHouseholderQr().solve(rhs);
  Eigen::VectorXd full = Eigen::VectorXd::Zero(theta.cols());
  for (Eigen::Index j = 0; j < k; ++j) full[active[std::size_t(j)]] = sol[j];
  return full;
}

}  // namespace

StlsqResult stlsq(const Eigen::Ref<const Eigen::MatrixXd>& theta,
                  const Eigen::Ref<const Eigen::VectorXd>& y, double threshold,
                  double ridge, int max_iter) {
  if (theta.rows() != y.size())
    throw std::invalid_argument("stlsq: theta rows != y length");
  if (threshold < 0 || ridge < 0)
    throw std::invalid_argument("stlsq: threshold and ridge must be >= 0");

  StlsqResult res;
  std::vector<Eigen::Index> active(std::size_t(theta.cols()));
  for (Eigen::Index j = 0; j < theta.cols(); ++j) active[std::size_t(j)] = j;
  res.coeffs = ridge_solve(theta, y, active, ridge);
  res.iterations = 1;

  while (true) {
    std::vector<Eigen::Index> kept;
    for (Eigen::Index j : active)
      if (std::abs(res.coeffs[j]) >= threshold) kept.push_back(j);
    if (kept.empty()) {
      res.coeffs.setZero();
      res.converged = true;
      res.warning = "threshold " + std::to_string(threshold) +
                    " removed every library term";
      return res;
    }
    if (kept.size() == active.size()) {
      res.converged = true;
      break;
    }
    if (res.iterations >= max_iter) break;
    active = std::move(kept);
    res.coeffs = ridge_solve(theta, y, active, ridge);
    ++res.iterations;
  }
  // Only reachable without convergence: enforce the threshold without refit.
  for (Eigen::Index j = 0; j < res.coeffs.size(); ++j)
    if (std::abs(res.coeffs[j]) < threshold) res.coeffs[j] = 0;
  return res;
}

SindyFit fit_sindy(const Dataset& ds, ModelFamily family,
                   const SindyParams& params) {
  require_valid(ds);
  SindyFit fit;
  fit.params = params;
  fit.library = build_library(family, params.degree);
  const Eigen::MatrixXd theta = library_matrix(fit.library, ds);
  const Eigen::VectorXd y = ds.fext - ds.xddot;
  fit.result = stlsq(theta, y, params.threshold, params.ridge, params.max_iter);
  fit.fit_residual = (theta * fit.result.coeffs - y).squaredNorm() / double(ds.size());

  fit.curve_a = Eigen::VectorXd::Zero(params.degree + 1);
  fit.curve_b = Eigen::VectorXd::Zero(params.degree + 1);
  for (std::size_t c = 0; c < fit.library.size(); ++c) {
    const LibraryTerm& t = fit.library[c];
    (t.curve == 0 ? fit.curve_a : fit.curve_b)[t.power] +=
        fit.result.coeffs[Eigen::Index(c)];
  }

  const Variable in_a = family == ModelFamily::PositionFriction
                            ? Variable::Position
                            : Variable::Velocity;
  const Domain dom_a = Domain::of(in_a == Variable::Position ? ds.x : ds.xdot);
  const Domain dom_b = Domain::of(ds.x);
  const Eigen::VectorXd ca = fit.curve_a, cb = fit.curve_b;
  fit.model = {family,
               CurveModel(CurveKind::SparsePolynomial, in_a,
                          [ca](double z) { return horner(ca, z); }, dom_a),
               CurveModel(CurveKind::SparsePolynomial, Variable::Position,
                          [cb](double z) { return horner(cb, z); }, dom_b)};
  return fit;
}

void write_sindy_csv(std::ostream& os, const SindyFit& fit) {
  const bool pos = fit.model.family == ModelFamily::PositionFriction;
  os << "curve,term,coeff\n" << std::setprecision(17);
  for (std::size_t c = 0; c < fit.library.size(); ++c) {
    const double v = fit.result.coeffs[Eigen::Index(c)];
    if (v == 0) continue;
    const int curve = fit.library[c].curve;
    const char* name = curve == 0 ? (pos ? "f1" : "f3") : (pos ? "f2" : "f4");
    os << name << ',' << fit.library[c].render() << ',' << v << '\n';
  }
}

}  // namespace ccident
