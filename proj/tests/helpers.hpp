#ifndef CCIDENT_TEST_HELPERS_HPP
#define CCIDENT_TEST_HELPERS_HPP

#include "ccident/odesim.hpp"
#include "ccident/systems.hpp"

namespace ccident::test {

inline Dataset default_dataset(const std::string& name,
                               const IntegratorConfig& cfg = {}) {
  const TrueSystem s = make_system(name);
  return integrate(s.model(), s.default_forcing, s.default_init.x0,
                   s.default_init.v0, cfg)
      .data;
}

/// x'' + c x' + k x = A cos(w t), written in the velocity family.
inline TrueSystem linear_oscillator(double c, double k) {
  TrueSystem s;
  s.name = "linear";
  s.family = ModelFamily::VelocityFriction;
  s.cc_a = CurveModel::analytic(Variable::Velocity, [c](double v) { return c * v; });
  s.cc_b = CurveModel::analytic(Variable::Position, [k](double x) { return k * x; });
  s.default_forcing = ForcingSpec::harmonic(1.0, 0.9);
  s.default_init = {0.3, -0.2};
  return s;
}

inline Dataset dataset_of(const TrueSystem& s, const IntegratorConfig& cfg = {}) {
  return integrate(s.model(), s.default_forcing, s.default_init.x0,
                   s.default_init.v0, cfg)
      .data;
}

}  // namespace ccident::test

#endif
