#include "ccident/odesim.hpp"
#include "ccident/systems.hpp"

#include <doctest.h>

#include <cmath>
#include <set>
#include <string>

using namespace ccident;

TEST_SUITE("systems") {

TEST_CASE("registry names and order") {
  const std::vector<std::string> want{
      "van_der_pol", "stick_slip", "duffing", "impact", "fitzhugh_nagumo",
      "dieterich_ruina", "stribeck", "coulomb_tanh_power", "backlash",
      "piecewise1", "piecewise2"};
  CHECK(registry_names() == want);
}

TEST_CASE("closed forms at reference parameters") {
  const TrueSystem vdp = make_system("van_der_pol", {{"mu", 0.501}, {"k", 1.22}});
  CHECK(vdp.cc_a(0) == doctest::Approx(-0.501));
  CHECK(vdp.cc_b(2) == doctest::Approx(2.44));

  const TrueSystem ss = make_system("stick_slip", {{"c", 0.386}, {"muN", 0.801}, {"k", 1.274}});
  CHECK(ss.cc_a(0) == 0.0);
  CHECK(ss.cc_a(1) == doctest::Approx(1.187));
  CHECK(ss.family == ModelFamily::VelocityFriction);

  CHECK(make_system("duffing").cc_b(1) == doctest::Approx(0.0));
  const TrueSystem dr = make_system("dieterich_ruina");
  for (double x : {-1.3, 0.0, 0.4, 2.0}) CHECK(dr.cc_b(x) == doctest::Approx(x));
}

TEST_CASE("unknown system lists the registry") {
  try {
    make_system("pendulum");
    FAIL("expected invalid_argument");
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    CHECK(msg.find("van_der_pol") != std::string::npos);
    CHECK(msg.find("piecewise2") != std::string::npos);
  }
}

TEST_CASE("missing and unexpected parameters are named") {
  try {
    make_system("van_der_pol", {{"mu", 1.0}});
    FAIL("expected invalid_argument");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("'k'") != std::string::npos);
  }
  CHECK_THROWS_AS(make_system("van_der_pol", {{"mu", 1.0}, {"k", 1.0}, {"q", 2.0}}),
                  std::invalid_argument);
}

TEST_CASE("every registry system integrates cleanly") {
  for (const auto& name : registry_names()) {
    INFO(std::string(name));
    const TrueSystem s = make_system(name);
    const Trajectory tr = integrate(s.model(), s.default_forcing,
                                    s.default_init.x0, s.default_init.v0);
    CHECK(tr.data.x.allFinite());
    CHECK(tr.data.t[499] == 40.0);
    const double bound = s.discontinuous ? 1e-6 : 1e-10;
    CHECK(residual(tr.data, s.model()).maxCoeff() < bound);
  }
}

TEST_CASE("Coulomb-type friction curves are odd") {
  for (const char* name : {"stick_slip", "dieterich_ruina", "stribeck",
                           "coulomb_tanh_power", "backlash", "piecewise1"}) {
    INFO(std::string(name));
    const TrueSystem s = make_system(name);
    CHECK(s.cc_a(0) == 0.0);
    for (double v = 0.001; v < 3; v *= 1.7) CHECK(s.cc_a(-v) == doctest::Approx(-s.cc_a(v)));
  }
}

TEST_CASE("backlash restoring curve is continuous at the gap") {
  const TrueSystem s = make_system("backlash");
  const double k = s.params.at("k"), d = s.params.at("d");
  const double x = d / k;
  for (double h = 1e-2; h > 1e-9; h /= 10) {
    CHECK(std::abs(s.cc_b(x + h) - s.cc_b(x)) <= 2 * k * h);
    CHECK(std::abs(s.cc_b(-x - h) - s.cc_b(-x)) <= 2 * k * h);
  }
}

TEST_CASE("piecewise2 restoring curve jumps where defined") {
  const TrueSystem s = make_system("piecewise2");
  for (double x : {1.5, 0.5, -0.3}) {
    INFO(x);
    CHECK(std::abs(s.cc_b(x + 1e-9) - s.cc_b(x - 1e-9)) > 1e-3);
  }
}

TEST_CASE("training configs stay in their intervals") {
  const SamplingProtocol p = van_der_pol_protocol(11);
  const auto cfgs = sample_training_configs(p, make_system("van_der_pol"));
  REQUIRE(cfgs.size() == 30);
  std::set<std::uint64_t> seeds;
  for (const auto& c : cfgs) {
    CHECK(c.params.at("mu") >= 0.5);
    CHECK(c.params.at("mu") <= 10);
    CHECK(c.params.at("k") >= 0.5);
    CHECK(c.forcing.amplitude <= 2);
    seeds.insert(c.seed);
  }
  CHECK(seeds.size() == 30);
  CHECK(sample_training_configs(p, make_system("van_der_pol"))[7].params ==
        cfgs[7].params);
}

TEST_CASE("degenerate interval gives a constant") {
  const SamplingProtocol p = stick_slip_protocol(3);
  for (const auto& c : sample_training_configs(p, make_system("stick_slip")))
    CHECK(c.forcing.amplitude == 2.0);
}

TEST_CASE("validation draws keep physical parameters") {
  const SamplingProtocol p = stick_slip_protocol(5);
  const auto train = sample_training_configs(p, make_system("stick_slip"));
  for (const auto& tc : train) {
    const auto vals = sample_validation_configs(p, tc);
    REQUIRE(vals.size() == 30);
    for (const auto& v : vals) {
      CHECK(v.forcing.amplitude >= 1.0);
      CHECK(v.forcing.amplitude <= 1.5);
      CHECK(std::abs(v.init.x0) <= 0.5);
    }
  }
  SamplingProtocol none = p;
  none.n_val_per_train = 0;
  CHECK(sample_validation_configs(none, train[0]).empty());
}

TEST_CASE("validation protocol cannot move physical parameters") {
  SamplingProtocol p = van_der_pol_protocol(0);
  p.validate["mu"] = {1, 2};
  CHECK_THROWS_AS(p.check(), std::invalid_argument);
}

TEST_CASE("FHN forcing carries eps*b") {
  const TrueSystem s = make_system("fitzhugh_nagumo");
  CHECK(s.default_forcing.form == ForcingForm::FHNComposite);
  CHECK(s.default_forcing.eps_b == doctest::Approx(0.08 * 0.8));
}

}
