#ifndef CCIDENT_ODESIM_HPP
#define CCIDENT_ODESIM_HPP

#include "ccident/core.hpp"
#include "ccident/dormand_prince.hpp"

#include <limits>

namespace ccident {

struct IntegratorConfig {
  double rtol = 1e-10;
  double atol = 1e-10;
  double max_step = std::numeric_limits<double>::infinity();
  double t_max = 40.0;
  Eigen::Index n_samples = 500;
  /// Applied when a curve is flagged discontinuous.
  double discontinuous_max_step = 0.01;
  /// Tolerance floor when a curve is flagged discontinuous. Sliding on a
  /// sign() jump forces steps of order tol/jump with an explicit method.
  double discontinuous_tol = 1e-6;
  double min_step = 1e-12;
  long max_steps = 50'000'000;
  /// simulate_identified() only: steps allowed at the smooth settings before
  /// retrying with the discontinuous ones. Learned curves can be steep
  /// enough near a jump to chatter like sign().
  long chatter_step_budget = 100'000;
  /// simulate_identified() only: step cap for that retry. A model that still
  /// cannot reach t_max raises StiffnessFailure.
  long identified_max_steps = 2'000'000;

  /// Throws std::invalid_argument on non-positive tolerances, horizon or
  /// fewer than two samples.
  void validate() const;
};

struct Trajectory {
  Dataset data;  // xddot recomputed from the right-hand side
  StepStats stats;
};

/// Integrates the family ODE for curves (cc_a, cc_b) from (x0, v0) at t = 0
/// to cfg.t_max with Dormand-Prince 5(4) and samples it on a uniform grid.
/// Throws StiffnessFailure or Divergence naming the time of failure.
Trajectory integrate(ModelFamily family, const CurveModel& cc_a,
                     const CurveModel& cc_b, const ForcingSpec& forcing,
                     double x0, double v0, const IntegratorConfig& cfg = {});

inline Trajectory integrate(const IdentifiedModel& model,
                            const ForcingSpec& forcing, double x0, double v0,
                            const IntegratorConfig& cfg = {}) {
  return integrate(model.family, model.cc_a, model.cc_b, forcing, x0, v0, cfg);
}

/// Forward simulation of an identified model. Curves honour their own
/// extrapolation policy outside the training domain; a model that blows up
/// raises the same errors as integrate(). A model that is not flagged
/// discontinuous but exhausts cfg.chatter_step_budget, or whose step size
/// underflows, is integrated again with the discontinuous settings.
Trajectory simulate_identified(const IdentifiedModel& model,
                               const ForcingSpec& forcing, double x0, double v0,
                               const IntegratorConfig& cfg = {});

}  // namespace ccident

#endif  // CCIDENT_ODESIM_HPP
