// Sparse polynomial characteristic curves via sequentially thresholded
// least squares (STLSQ).
//
// The forcing term enters with a fixed unit coefficient, so it is moved to
// the target (y = F_ext - x'') instead of being a library column, and the
// velocity-family library never mixes x and x'.

#ifndef CCIDENT_SINDY_CC_HPP
#define CCIDENT_SINDY_CC_HPP

#include "ccident/core.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace ccident {

/// One library column. `curve` 0 contributes to cc_a (f1 or f3), 1 to cc_b.
/// Position family, curve 0:  x^power * xdot
/// Velocity family, curve 0:  xdot^power
/// Either family,   curve 1:  x^power
struct LibraryTerm {
  int curve = 0;
  int power = 0;
  bool times_xdot = false;
  Variable var = Variable::Position;

  double eval(double x, double v) const;
  /// e.g. "x^2*xdot", "xdot", "1", "x".
  std::string render() const;
  bool operator==(const LibraryTerm&) const = default;
};

std::vector<LibraryTerm> build_library(ModelFamily family, int degree);

/// Library evaluated on the dataset, one column per term.
Eigen::MatrixXd library_matrix(const std::vector<LibraryTerm>& lib,
                               const Dataset& ds);

struct StlsqResult {
  Eigen::VectorXd coeffs;  // inactive entries are exactly 0
  int iterations = 0;
  bool converged = false;
  std::string warning;  // set when the threshold removes every term
};

/// Ridge-regularized least squares on the active set alternated with hard
/// thresholding at `threshold`, until the active set stops changing or
/// max_iter refits have run. Every returned nonzero has |c| >= threshold.
StlsqResult stlsq(const Eigen::Ref<const Eigen::MatrixXd>& theta,
                  const Eigen::Ref<const Eigen::VectorXd>& y, double threshold,
                  double ridge, int max_iter = 20);

struct SindyParams {
  int degree = 10;
  double threshold = 0.05;
  double ridge = 1e-5;
  int max_iter = 20;
};

struct SindyFit {
  IdentifiedModel model;
  std::vector<LibraryTerm> library;
  StlsqResult result;
  SindyParams params;
  Eigen::VectorXd curve_a, curve_b;  // monomial coefficients, index = power
  double fit_residual = 0;
};

SindyFit fit_sindy(const Dataset& ds, ModelFamily family,
                   const SindyParams& params = {});

/// Active terms only, CSV `curve,term,coeff`.
void write_sindy_csv(std::ostream& os, const SindyFit& fit);

}  // namespace ccident

#endif  // CCIDENT_SINDY_CC_HPP
