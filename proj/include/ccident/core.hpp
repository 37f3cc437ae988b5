// Domain vocabulary: model families, datasets, characteristic curves and
// forcing terms.

#ifndef CCIDENT_CORE_HPP
#define CCIDENT_CORE_HPP

#include "ccident/errors.hpp"

#include <Eigen/Dense>

#include <functional>
#include <iosfwd>
#include <limits>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace ccident {

/// PositionFriction:  x'' + f1(x) x' + f2(x) = F(t)
/// VelocityFriction:  x'' + f3(x') + f4(x)  = F(t)
enum class ModelFamily { PositionFriction, VelocityFriction };

std::string_view family_name(ModelFamily f);
/// Accepts "position", "velocity", "1" or "2".
ModelFamily parse_family(std::string_view s);
inline int family_index(ModelFamily f) {
  return f == ModelFamily::PositionFriction ? 1 : 2;
}

/// Uniformly sampled trajectory. All columns share one length.
struct Dataset {
  Eigen::VectorXd t, x, xdot, xddot, fext;

  Eigen::Index size() const { return t.size(); }
  double step() const { return (t[size() - 1] - t[0]) / double(size() - 1); }
};

/// Empty iff the dataset satisfies every invariant. Messages have the form
/// "<series> <problem> @ <index>".
std::vector<std::string> validate_dataset(const Dataset& ds);

/// Throws InvalidData listing the violations, if any.
void require_valid(const Dataset& ds);

/// n points from t0 to tf inclusive; endpoints are exact.
Eigen::VectorXd uniform_grid(double t0, double tf, Eigen::Index n);

/// Piecewise-cubic (4-point Lagrange) interpolation of (t_raw, y_raw) onto
/// uniform_grid(t_raw.front(), t_raw.back(), n). Exact for cubics.
Eigen::VectorXd resample_uniform(const Eigen::Ref<const Eigen::VectorXd>& t_raw,
                                 const Eigen::Ref<const Eigen::VectorXd>& y_raw,
                                 Eigen::Index n);

struct Derivatives {
  Eigen::VectorXd xdot, xddot;
};

/// Fourth-order central differences in the interior, five-point one-sided
/// stencils at the two outermost samples of each edge. `smoothing` is the
/// width of a centred moving average applied to x first (1 disables it).
Derivatives estimate_derivatives(const Eigen::Ref<const Eigen::VectorXd>& t,
                                 const Eigen::Ref<const Eigen::VectorXd>& x,
                                 int smoothing = 1);

/// Fills xdot/xddot from x when they are absent (empty).
Dataset with_estimated_derivatives(Dataset ds, int smoothing = 1);

enum class CurveKind { Polynomial, SparsePolynomial, Neural, Analytic };
enum class Extrapolation { Native, LinearEdges };
/// The state variable a curve is evaluated on.
enum class Variable { Position, Velocity };

std::string_view curve_kind_name(CurveKind k);

struct Domain {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();

  double width() const { return hi - lo; }
  double center() const { return 0.5 * (hi + lo); }
  bool contains(double z) const { return z >= lo && z <= hi; }
  bool bounded() const { return std::isfinite(lo) && std::isfinite(hi); }
  static Domain of(const Eigen::Ref<const Eigen::VectorXd>& z) {
    return {z.minCoeff(), z.maxCoeff()};
  }
};

/// Lines used below lo and above hi under Extrapolation::LinearEdges.
struct EdgeLines {
  double lo_slope = 0, lo_intercept = 0;
  double hi_slope = 0, hi_intercept = 0;
};

/// A scalar characteristic curve z -> f(z). Immutable; copies share the
/// underlying evaluator.
class CurveModel {
 public:
  using Function = std::function<double(double)>;

  CurveModel();  // f == 0 everywhere
  CurveModel(CurveKind kind, Variable input, Function f, Domain domain = {},
             bool discontinuous = false);

  static CurveModel analytic(Variable input, Function f,
                             bool discontinuous = false);
  static CurveModel zero(Variable input);

  /// Copy that evaluates `lines` outside the domain.
  CurveModel with_edge_lines(const EdgeLines& lines) const;

  double operator()(double z) const;
  /// Evaluation ignoring the extrapolation policy.
  double raw(double z) const { return f_(z); }

  CurveKind kind() const { return kind_; }
  Variable input() const { return input_; }
  const Domain& domain() const { return domain_; }
  Extrapolation extrapolation() const { return extrapolation_; }
  const EdgeLines& edge_lines() const { return edges_; }
  bool discontinuous() const { return discontinuous_; }

 private:
  CurveKind kind_ = CurveKind::Analytic;
  Variable input_ = Variable::Position;
  Function f_;
  Domain domain_;
  Extrapolation extrapolation_ = Extrapolation::Native;
  EdgeLines edges_;
  bool discontinuous_ = false;
};

/// A model family with its two curves: (f1, f2) or (f3, f4).
struct IdentifiedModel {
  ModelFamily family = ModelFamily::PositionFriction;
  CurveModel cc_a;  // f1(x) or f3(xdot)
  CurveModel cc_b;  // f2(x) or f4(x)

  /// Throws std::invalid_argument if the curve inputs do not match the family.
  void check() const;
  bool discontinuous() const {
    return cc_a.discontinuous() || cc_b.discontinuous();
  }
  /// friction + restoring terms at (x, v).
  double internal_force(double x, double v) const;
};

enum class ForcingForm { Zero, HarmonicCos, FHNComposite };

/// HarmonicCos:   A cos(W t)
/// FHNComposite:  -eps_b I(t) - I'(t) with I(t) = A cos(W t)
struct ForcingSpec {
  ForcingForm form = ForcingForm::Zero;
  double amplitude = 0;
  double omega = 0;
  double eps_b = 0;  // FHNComposite only

  static ForcingSpec zero() { return {}; }
  static ForcingSpec harmonic(double a, double w) {
    return {ForcingForm::HarmonicCos, a, w, 0};
  }
  static ForcingSpec fhn(double a, double w, double eps_b) {
    return {ForcingForm::FHNComposite, a, w, eps_b};
  }

  double operator()(double t) const;
  bool operator==(const ForcingSpec&) const = default;
};

/// Squared equation residual per sample.
Eigen::VectorXd residual(const Dataset& ds, const IdentifiedModel& model);

/// Dataset CSV: header `t,x,xdot,xddot,fext`, 17 significant digits.
void write_dataset_csv(std::ostream& os, const Dataset& ds);
void write_dataset_csv(const std::string& path, const Dataset& ds);
Dataset read_dataset_csv(std::istream& is);
Dataset read_dataset_csv(const std::string& path);

}  // namespace ccident

#endif  // CCIDENT_CORE_HPP
