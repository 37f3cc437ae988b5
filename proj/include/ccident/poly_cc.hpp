// Polynomial characteristic curves fitted by linear least squares in a
// shifted and normalized variable.

#ifndef CCIDENT_POLY_CC_HPP
#define CCIDENT_POLY_CC_HPP

#include "ccident/core.hpp"

#include <iosfwd>

namespace ccident {

/// Converts coefficients of sum_k c_hat[k] * ((z - a0) / a1)^k into monomial
/// coefficients of sum_j c[j] * z^j, i.e.
///   c[j] = sum_{k=j}^{N} C(k, j) (-a0)^(k-j) / a1^k * c_hat[k],
/// accumulated from j = N down to 0.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> back_transform(
    const Eigen::MatrixBase<Derived>& shifted, typename Derived::Scalar a0,
    typename Derived::Scalar a1) {
  using Scalar = typename Derived::Scalar;
  if (a1 == Scalar(0)) throw std::invalid_argument("back_transform: A1 == 0");
  const Eigen::Index n = shifted.size();
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> c(n);
  // inv_a1_pow[k] = a1^-k, neg_a0_pow[m] = (-a0)^m
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> inv_a1_pow(n), neg_a0_pow(n);
  if (n > 0) {
    inv_a1_pow[0] = neg_a0_pow[0] = Scalar(1);
    for (Eigen::Index k = 1; k < n; ++k) {
      inv_a1_pow[k] = inv_a1_pow[k - 1] / a1;
      neg_a0_pow[k] = neg_a0_pow[k - 1] * -a0;
    }
  }
  for (Eigen::Index j = n - 1; j >= 0; --j) {
    Scalar acc = shifted[j] * inv_a1_pow[j];
    Scalar binom = Scalar(1);  // C(k, j), starting at k = j
    for (Eigen::Index k = j + 1; k < n; ++k) {
      binom = binom * Scalar(k) / Scalar(k - j);
      acc += binom * neg_a0_pow[k - j] * inv_a1_pow[k] * shifted[k];
    }
    c[j] = acc;
  }
  return c;
}

/// Horner evaluation of sum_j coeffs[j] * u^j.
template <typename Derived>
typename Derived::Scalar horner(const Eigen::MatrixBase<Derived>& coeffs,
                                typename Derived::Scalar u) {
  typename Derived::Scalar acc(0);
  for (Eigen::Index j = coeffs.size() - 1; j >= 0; --j) acc = acc * u + coeffs[j];
  return acc;
}

struct PolyCurve {
  int degree = 0;
  Eigen::VectorXd shifted;  // c_hat_0 .. c_hat_N
  double a0 = 0, a1 = 1;    // z_hat = (z - a0) / a1
  Domain domain;
  Variable input = Variable::Position;

  /// A0 = (max + min) / 2, A1 = (max - min) / 2 of the training samples.
  static PolyCurve for_samples(const Eigen::Ref<const Eigen::VectorXd>& z,
                               int degree, Variable input);

  double normalize(double z) const { return (z - a0) / a1; }
  double operator()(double z) const { return horner(shifted, normalize(z)); }
  Eigen::VectorXd monomial() const { return back_transform(shifted, a0, a1); }
  CurveModel curve() const;
};

struct PolyFit {
  IdentifiedModel model;
  PolyCurve a, b;
  bool rank_deficient = false;
  Eigen::Index rank = 0;
  Eigen::Index columns = 0;
  double fit_residual = 0;  // mean squared forcing error on the training set
};

/// Joint least-squares fit of both curves to y = F_ext - x''. For the
/// velocity family the restoring curve has no constant term (f4(0) = 0).
/// Singular values below 1e-12 * sigma_max are dropped (minimum-norm
/// solution) and flagged through `rank_deficient`.
PolyFit fit_poly(const Dataset& ds, ModelFamily family, int degree = 10);

/// CSV `curve,basis,j,coeff`, basis in {shifted, monomial}.
void write_poly_csv(std::ostream& os, const PolyFit& fit);

}  // namespace ccident

#endif  // CCIDENT_POLY_CC_HPP
