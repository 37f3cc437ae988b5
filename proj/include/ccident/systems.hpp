// Benchmark oscillators with closed-form characteristic curves, plus the
// random train/validate samplers used by the sweeps.

#ifndef CCIDENT_SYSTEMS_HPP
#define CCIDENT_SYSTEMS_HPP

#include "ccident/core.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace ccident {

using ParamMap = std::map<std::string, double>;

struct InitialState {
  double x0 = 0;
  double v0 = 0;
  bool operator==(const InitialState&) const = default;
};

struct TrueSystem {
  std::string name;
  ModelFamily family = ModelFamily::PositionFriction;
  CurveModel cc_a, cc_b;
  ParamMap params;
  ForcingSpec default_forcing;
  InitialState default_init;
  bool discontinuous = false;

  IdentifiedModel model() const { return {family, cc_a, cc_b}; }
};

/// sign(0) == 0.
inline double sign(double v) { return double((v > 0) - (v < 0)); }

/// Registry names, in a fixed order.
const std::vector<std::string>& registry_names();

/// Reference parameters of a registry system.
ParamMap default_params(std::string_view name);

/// Builds `name` from a complete parameter record. Unknown names, missing
/// parameters and unexpected parameters raise std::invalid_argument.
TrueSystem make_system(std::string_view name, const ParamMap& params);

inline TrueSystem make_system(std::string_view name) {
  return make_system(name, default_params(name));
}

/// Harmonic (or FHN composite) forcing of `name` at (amplitude, omega), with
/// any parameter-dependent pieces taken from `params`.
ForcingSpec forcing_for(std::string_view name, const ParamMap& params,
                        double amplitude, double omega);

struct Interval {
  double lo = 0, hi = 0;
  bool operator==(const Interval&) const = default;
};

/// Keys "A", "omega", "x0", "v0" address forcing and initial state; every
/// other key is a physical parameter of the system.
struct SamplingProtocol {
  std::map<std::string, Interval> train;
  std::map<std::string, Interval> validate;  // forcing/initial-state keys only
  int n_train = 30;
  int n_val_per_train = 30;
  std::uint64_t rng_seed = 0;

  void check() const;
};

struct TrainingConfig {
  std::size_t index = 0;
  ParamMap params;
  ForcingSpec forcing;
  InitialState init;
  std::uint64_t seed = 0;  // seeds this config's validation draws and NN fits
};

struct ValidationConfig {
  ForcingSpec forcing;
  InitialState init;
  bool operator==(const ValidationConfig&) const = default;
};

/// n_train independent uniform draws; parameters absent from the protocol
/// keep the system's values. Deterministic in protocol.rng_seed.
std::vector<TrainingConfig> sample_training_configs(
    const SamplingProtocol& protocol, const TrueSystem& system);

/// n_val_per_train draws of forcing and initial state only; the forcing form
/// and physical parameters come from `training`.
std::vector<ValidationConfig> sample_validation_configs(
    const SamplingProtocol& protocol, const TrainingConfig& training);

/// mu, k, A, omega, x0, v0 as in the van der Pol 30x30 study.
SamplingProtocol van_der_pol_protocol(std::uint64_t seed);
/// muN, k, c, omega, x0, v0 with A = 2 for training; A in [1, 1.5] for
/// validation.
SamplingProtocol stick_slip_protocol(std::uint64_t seed);

}  // namespace ccident

#endif  // CCIDENT_SYSTEMS_HPP
