#include "ccident/odesim.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ccident {

void IntegratorConfig::validate() const {
  if (!(rtol > 0) || !(atol > 0))
    throw std::invalid_argument("integrator: rtol and atol must be > 0");
  if (!(t_max > 0)) throw std::invalid_argument("integrator: t_max must be > 0");
  if (n_samples < 2)
    throw std::invalid_argument("integrator: n_samples must be >= 2");
  if (!(max_step > 0))
    throw std::invalid_argument("integrator: max_step must be > 0");
}

Trajectory integrate(ModelFamily family, const CurveModel& cc_a,
                     const CurveModel& cc_b, const ForcingSpec& forcing,
                     double x0, double v0, const IntegratorConfig& cfg) {
  cfg.validate();
  const IdentifiedModel model{family, cc_a, cc_b};
  model.check();

  StepControl ctl;
  ctl.rtol = cfg.rtol;
  ctl.atol = cfg.atol;
  ctl.max_step = cfg.max_step;
  ctl.min_step = cfg.min_step;
  ctl.max_steps = cfg.max_steps;
  if (model.discontinuous()) {
    ctl.max_step = std::min(ctl.max_step, cfg.discontinuous_max_step);
    ctl.rtol = std::max(ctl.rtol, cfg.discontinuous_tol);
    ctl.atol = std::max(ctl.atol, cfg.discontinuous_tol);
  }

  const Eigen::Index n = cfg.n_samples;
  Trajectory tr;
  Dataset& d = tr.data;
  d.t = uniform_grid(0.0, cfg.t_max, n);
  d.x.resize(n);
  d.xdot.resize(n);
  d.xddot.resize(n);
  d.fext.resize(n);

  auto rhs = [&](double t, const Eigen::Vector2d& y, Eigen::Vector2d& dy) {
    dy[0] = y[1];
    dy[1] = forcing(t) - model.internal_force(y[0], y[1]);
  };
  auto sink = [&](Eigen::Index i, const Eigen::Vector2d& y) {
    d.x[i] = y[0];
    d.xdot[i] = y[1];
  };

  const SolveResult res = dormand_prince<double, 2>(
      rhs, 0.0, cfg.t_max, Eigen::Vector2d(x0, v0), d.t, sink, ctl);
  tr.stats = res.stats;

  auto where = [](const char* what, double t) {
    std::ostringstream os;
    os << what << " at t=" << t;
    return os.str();
  };
  switch (res.outcome) {
    case StepOutcome::Finished: break;
    case StepOutcome::StepUnderflow:
      throw StiffnessFailure(where("step size underflow", res.t_fail), res.t_fail);
    case StepOutcome::TooManySteps:
      throw StiffnessFailure(where("step budget exhausted", res.t_fail),
                             res.t_fail);
    case StepOutcome::NonFinite:
      throw Divergence(where("non-finite state", res.t_fail), res.t_fail);
  }

  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::isfinite(d.x[i]) || !std::isfinite(d.xdot[i]))
      throw Divergence(where("non-finite state", d.t[i]), d.t[i]);
    d.fext[i] = forcing(d.t[i]);
    d.xddot[i] = d.fext[i] - model.internal_force(d.x[i], d.xdot[i]);
    if (!std::isfinite(d.xddot[i]))
      throw Divergence(where("non-finite acceleration", d.t[i]), d.t[i]);
  }
  return tr;
}

Trajectory simulate_identified(const IdentifiedModel& model,
                               const ForcingSpec& forcing, double x0, double v0,
                               const IntegratorConfig& cfg) {
  if (model.discontinuous())
    return integrate(model.family, model.cc_a, model.cc_b, forcing, x0, v0, cfg);
  IntegratorConfig first = cfg;
  first.max_steps = std::min(cfg.max_steps, cfg.chatter_step_budget);
  try {
    return integrate(model.family, model.cc_a, model.cc_b, forcing, x0, v0, first);
  } catch (const StiffnessFailure&) {
    IntegratorConfig rough = cfg;
    rough.max_step = std::min(cfg.max_step, cfg.discontinuous_max_step);
    rough.rtol = std::max(cfg.rtol, cfg.discontinuous_tol);
    rough.atol = std::max(cfg.atol, cfg.discontinuous_tol);
    rough.max_steps = std::min(cfg.max_steps, cfg.identified_max_steps);
    return integrate(model.family, model.cc_a, model.cc_b, forcing, x0, v0, rough);
  }
}

}  // namespace ccident
