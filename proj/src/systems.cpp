#include "ccident/systems.hpp"

#include "ccident/rng.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace ccident {

namespace {

struct Definition {
  std::string name;
  ModelFamily family;
  ParamMap defaults;
  double amplitude, omega;
  InitialState init;
  bool discontinuous;
  // Builds (cc_a, cc_b) from a complete parameter record.
  std::function<std::pair<CurveModel::Function, CurveModel::Function>(
      const ParamMap&)>
      curves;
};

constexpr InitialState kPositionAppendixInit{0.5, 0.5};
constexpr InitialState kVelocityAppendixInit{0.1, 0.1};

const std::vector<Definition>& definitions() {
  using P = ModelFamily;
  static const std::vector<Definition> defs = {
      {"van_der_pol", P::PositionFriction, {{"mu", 0.501}, {"k", 1.22}},
       0.834, 1.512, {-0.353, -0.408}, false,
       [](const ParamMap& p) {
         const double mu = p.at("mu"), k = p.at("k");
         return std::pair{CurveModel::Function([=](double x) { return mu * (x * x - 1); }),
                          CurveModel::Function([=](double x) { return k * x; })};
       }},
      {"stick_slip", P::VelocityFriction,
       {{"c", 0.386}, {"muN", 0.801}, {"k", 1.274}}, 2.0, 0.363,
       {-0.076, 0.146}, true,
       [](const ParamMap& p) {
         const double c = p.at("c"), mun = p.at("muN"), k = p.at("k");
         return std::pair{CurveModel::Function([=](double v) { return c * v + mun * sign(v); }),
                          CurveModel::Function([=](double x) { return k * x; })};
       }},
      {"duffing", P::PositionFriction,
       {{"delta", 0.3}, {"alpha", -1.0}, {"beta", 1.0}}, 0.5, 1.2,
       kPositionAppendixInit, false,
       [](const ParamMap& p) {
         const double d = p.at("delta"), a = p.at("alpha"), b = p.at("beta");
         return std::pair{CurveModel::Function([=](double) { return d; }),
                          CurveModel::Function([=](double x) { return a * x + b * x * x * x; })};
       }},
      {"impact", P::PositionFriction, {{"c", 0.1}, {"k", 0.5}, {"x_lim", 0.5}},
       0.5, 1.2, kPositionAppendixInit, false,
       [](const ParamMap& p) {
         const double c = p.at("c"), k = p.at("k"), xl = p.at("x_lim");
         return std::pair{
             CurveModel::Function([=](double) { return c; }),
             CurveModel::Function([=](double x) { return k * x + k * std::max(x - xl, 0.0); })};
       }},
      {"fitzhugh_nagumo", P::PositionFriction,
       {{"a", 0.7}, {"b", 0.8}, {"eps", 0.08}}, 2.0, 1.2,
       kPositionAppendixInit, false,
       [](const ParamMap& p) {
         const double a = p.at("a"), b = p.at("b"), e = p.at("eps");
         return std::pair{
             CurveModel::Function([=](double x) { return x * x + e * b - 1; }),
             CurveModel::Function([=](double x) {
               return e * (a + (1 - b) * x + b * x * x * x / 3);
             })};
       }},
      {"dieterich_ruina", P::VelocityFriction,
       {{"c", 0.1}, {"k", 1.0}, {"F_f", 0.5}, {"a", 0.07}, {"b", 0.09},
        {"d", 0.022}, {"V_f", 3e-3}, {"eps", 1e-6}},
       2.0, 0.3, kVelocityAppendixInit, true,
       [](const ParamMap& p) {
         const double c = p.at("c"), k = p.at("k"), ff = p.at("F_f"),
                      a = p.at("a"), b = p.at("b"), d = p.at("d"),
                      vf = p.at("V_f"), eps = p.at("eps");
         return std::pair{
             CurveModel::Function([=](double v) {
               const double s = std::abs(v) + eps;
               return c * v +
                      (ff + a * std::log(s / vf) + b * std::log(d + vf / s)) *
                          sign(v);
             }),
             CurveModel::Function([=](double x) { return k * x; })};
       }},
      {"stribeck", P::VelocityFriction,
       {{"c", 0.1}, {"k", 1.0}, {"F_f", 0.5}, {"a", 0.07}, {"beta", 0.3},
        {"V_f", 0.1}, {"b", 2.0}},
       2.0, 0.3, kVelocityAppendixInit, true,
       [](const ParamMap& p) {
         const double c = p.at("c"), k = p.at("k"), ff = p.at("F_f"),
                      a = p.at("a"), beta = p.at("beta"), vf = p.at("V_f"),
                      b = p.at("b");
         return std::pair{
             CurveModel::Function([=](double v) {
               return c * v +
                      (ff + a * std::exp(-std::pow(std::abs(v) / vf, b))) *
                          sign(v);
             }),
             CurveModel::Function([=](double x) { return k * x + beta * x * x * x; })};
       }},
      {"coulomb_tanh_power", P::VelocityFriction,
       {{"c", 0.1}, {"k", 1.0}, {"F_f", 0.5}, {"alpha", 500.0},
        {"beta", 0.3}, {"gamma", 3.0}},
       2.0, 0.3, kVelocityAppendixInit, true,
       [](const ParamMap& p) {
         const double c = p.at("c"), k = p.at("k"), ff = p.at("F_f"),
                      alpha = p.at("alpha"), beta = p.at("beta"),
                      gamma = p.at("gamma");
         return std::pair{
             CurveModel::Function([=](double v) {
               // Odd extension of v^gamma; identical for odd integer gamma.
               const double pw = sign(v) * std::pow(std::abs(v), gamma);
               return c * v + ff * std::tanh(alpha * pw);
             }),
             CurveModel::Function([=](double x) { return k * x + beta * x * x * x; })};
       }},
      {"backlash", P::VelocityFriction,
       {{"c", 0.1}, {"k", 2.0}, {"F_f", 0.5}, {"d", 0.5}}, 2.0, 0.3,
       kVelocityAppendixInit, true,
       [](const ParamMap& p) {
         const double c = p.at("c"), k = p.at("k"), ff = p.at("F_f"),
                      d = p.at("d");
         return std::pair{
             CurveModel::Function([=](double v) { return c * v + ff * sign(v); }),
             CurveModel::Function([=](double x) {
               const double kx = k * x;
               if (kx < -d) return kx + d;
               if (kx > d) return kx - d;
               return 0.0;
             })};
       }},
      {"piecewise1", P::VelocityFriction, {{"c", 0.1}, {"F_f", 0.5}}, 2.0, 0.3,
       kVelocityAppendixInit, true,
       [](const ParamMap& p) {
         const double c = p.at("c"), ff = p.at("F_f");
         return std::pair{
             CurveModel::Function([=](double v) { return c * v + ff * sign(v); }),
             CurveModel::Function([](double x) {
               if (x >= 1) return x * x;
               if (x >= 0.5) return 1.0;
               const double u = x - 1;
               return u * u * u;
             })};
       }},
      {"piecewise2", P::VelocityFriction, {{"c", 0.1}, {"F_f", 0.5}}, 2.0, 0.3,
       kVelocityAppendixInit, true,
       [](const ParamMap& p) {
         const double c = p.at("c"), ff = p.at("F_f");
         return std::pair{
             CurveModel::Function([=](double v) { return c * v + ff * sign(v); }),
             CurveModel::Function([](double x) {
               if (x >= 1.5) return 0.5 * x;
               if (x >= 1) return x * x;
               if (x >= 0.5) return 1.0;
               if (x >= -0.3) {
                 const double u = x - 1;
                 return u * u * u;
               }
               return 2 * x - 3;
             })};
       }},
  };
  return defs;
}

const Definition& find(std::string_view name) {
  for (const auto& d : definitions())
    if (d.name == name) return d;
  std::string msg = "unknown system '" + std::string(name) + "'; registry:";
  for (const auto& d : definitions()) msg += " " + d.name;
  throw std::invalid_argument(msg);
}

}  // namespace

const std::vector<std::string>& registry_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& d : definitions()) n.push_back(d.name);
    return n;
  }();
  return names;
}

ParamMap default_params(std::string_view name) { return find(name).defaults; }

ForcingSpec forcing_for(std::string_view name, const ParamMap& params,
                        double amplitude, double omega) {
  if (name == "fitzhugh_nagumo")
    return ForcingSpec::fhn(amplitude, omega, params.at("eps") * params.at("b"));
  return ForcingSpec::harmonic(amplitude, omega);
}

TrueSystem make_system(std::string_view name, const ParamMap& params) {
  const Definition& def = find(name);
  for (const auto& [key, _] : def.defaults)
    if (!params.count(key))
      throw std::invalid_argument("system '" + def.name +
                                  "': missing parameter '" + key + "'");
  for (const auto& [key, _] : params)
    if (!def.defaults.count(key))
      throw std::invalid_argument("system '" + def.name +
                                  "': unknown parameter '" + key + "'");

  auto [fa, fb] = def.curves(params);
  const Variable in_a = def.family == ModelFamily::PositionFriction
                            ? Variable::Position
                            : Variable::Velocity;
  TrueSystem s;
  s.name = def.name;
  s.family = def.family;
  s.cc_a = CurveModel::analytic(in_a, std::move(fa), def.discontinuous);
  s.cc_b = CurveModel::analytic(Variable::Position, std::move(fb),
                                def.discontinuous);
  s.params = params;
  s.default_forcing = forcing_for(def.name, params, def.amplitude, def.omega);
  s.default_init = def.init;
  s.discontinuous = def.discontinuous;
  return s;
}

void SamplingProtocol::check() const {
  for (const auto* m : {&train, &validate})
    for (const auto& [key, iv] : *m)
      if (!(iv.lo <= iv.hi) || !std::isfinite(iv.lo) || !std::isfinite(iv.hi))
        throw std::invalid_argument("protocol interval for '" + key +
                                    "' is not a finite [lo, hi]");
  for (const auto& [key, _] : validate)
    if (key != "A" && key != "omega" && key != "x0" && key != "v0")
      throw std::invalid_argument(
          "validation protocol may only resample A, omega, x0, v0 (got '" +
          key + "')");
  if (n_train < 0 || n_val_per_train < 0)
    throw std::invalid_argument("protocol counts must be non-negative");
}

namespace {

bool is_forcing_key(const std::string& k) {
  return k == "A" || k == "omega" || k == "x0" || k == "v0";
}

}  // namespace

std::vector<TrainingConfig> sample_training_configs(
    const SamplingProtocol& protocol, const TrueSystem& system) {
  protocol.check();
  for (const auto& [key, _] : protocol.train)
    if (!is_forcing_key(key) && !system.params.count(key))
      throw std::invalid_argument("protocol samples unknown parameter '" + key +
                                  "' of " + system.name);

  Xoshiro256 rng(protocol.rng_seed);
  std::vector<TrainingConfig> out;
  out.reserve(std::size_t(protocol.n_train));
  for (int i = 0; i < protocol.n_train; ++i) {
    TrainingConfig cfg;
    cfg.index = std::size_t(i);
    cfg.params = system.params;
    double amp = system.default_forcing.amplitude;
    double omega = system.default_forcing.omega;
    cfg.init = system.default_init;
    // std::map iteration order keeps the draw sequence stable.
    for (const auto& [key, iv] : protocol.train) {
      const double v = rng.uniform(iv.lo, iv.hi);
      if (key == "A") amp = v;
      else if (key == "omega") omega = v;
      else if (key == "x0") cfg.init.x0 = v;
      else if (key == "v0") cfg.init.v0 = v;
      else cfg.params[key] = v;
    }
    cfg.forcing = forcing_for(system.name, cfg.params, amp, omega);
    if (system.default_forcing.form == ForcingForm::Zero)
      cfg.forcing = ForcingSpec::zero();
    cfg.seed = fan_out_seed(protocol.rng_seed, std::uint64_t(i));
    out.push_back(std::move(cfg));
  }
  return out;
}

std::vector<ValidationConfig> sample_validation_configs(
    const SamplingProtocol& protocol, const TrainingConfig& training) {
  protocol.check();
  Xoshiro256 rng(fan_out_seed(training.seed, 0x7661'6c69'6461'7465ULL));
  std::vector<ValidationConfig> out;
  out.reserve(std::size_t(protocol.n_val_per_train));
  for (int j = 0; j < protocol.n_val_per_train; ++j) {
    ValidationConfig v{training.forcing, training.init};
    for (const auto& [key, iv] : protocol.validate) {
      const double s = rng.uniform(iv.lo, iv.hi);
      if (key == "A") v.forcing.amplitude = s;
      else if (key == "omega") v.forcing.omega = s;
      else if (key == "x0") v.init.x0 = s;
      else if (key == "v0") v.init.v0 = s;
    }
    out.push_back(v);
  }
  return out;
}

SamplingProtocol van_der_pol_protocol(std::uint64_t seed) {
  SamplingProtocol p;
  p.train = {{"mu", {0.5, 10}},     {"k", {0.5, 1.5}},   {"A", {0, 2}},
             {"omega", {0, 5}},     {"x0", {-0.5, 0.5}}, {"v0", {-0.5, 0.5}}};
  p.validate = {{"A", {0, 2}},
                {"omega", {0, 5}},
                {"x0", {-0.5, 0.5}},
                {"v0", {-0.5, 0.5}}};
  p.rng_seed = seed;
  return p;
}

SamplingProtocol stick_slip_protocol(std::uint64_t seed) {
  SamplingProtocol p;
  p.train = {{"muN", {0.5, 1}},     {"k", {0.5, 1.5}},   {"c", {0.1, 0.5}},
             {"A", {2, 2}},         {"omega", {0, 5}},   {"x0", {-0.5, 0.5}},
             {"v0", {-0.5, 0.5}}};
  p.validate = {{"A", {1, 1.5}},
                {"omega", {0, 5}},
                {"x0", {-0.5, 0.5}},
                {"v0", {-0.5, 0.5}}};
  p.rng_seed = seed;
  return p;
}

}  // namespace ccident
