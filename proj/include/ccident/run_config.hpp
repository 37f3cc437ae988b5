// Run configuration for the command-line tool: JSON documents layered as
// preset <- config file <- dotted-key overrides, parsed strictly.

#ifndef CCIDENT_RUN_CONFIG_HPP
#define CCIDENT_RUN_CONFIG_HPP

#include "ccident/harness.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ccident {

/// Malformed, incomplete or contradictory configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string preset;
  std::string system;
  ParamMap params;  // complete parameter record
  ModelFamily family = ModelFamily::PositionFriction;
  ForcingSpec forcing;
  InitialState init;
  ValidationConfig validation;  // single validation run / family selection
  IntegratorConfig integrator;
  std::vector<Method> methods = all_methods();
  MethodSettings settings;
  std::optional<SamplingProtocol> protocol;  // sweep mode when set
  ArchAxis axis = ArchAxis::Neurons;
  std::vector<std::string> arch_values;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  std::string out = "out";

  /// Training configuration as a forcing/init pair.
  ValidationConfig training() const { return {forcing, init}; }
  TrueSystem true_system() const { return make_system(system, params); }
};

/// paper-3.1, paper-3.2, paper-sweep and appendix-<system> for every
/// registry system.
std::vector<std::string> preset_names();

struct ConfigSources {
  std::string preset;
  std::string system;     // overrides the preset's system when non-empty
  std::string file_text;  // JSON document, may be empty
  /// Dotted key -> JSON literal, e.g. {"nn.epochs", "500"}.
  std::vector<std::pair<std::string, std::string>> overrides;
};

/// Resolves the layers into a complete configuration. Throws ConfigError
/// naming the offending key.
RunConfig load_config(const ConfigSources& src);

/// Fully resolved configuration as a JSON document.
std::string to_json_text(const RunConfig& cfg);

}  // namespace ccident

#endif  // CCIDENT_RUN_CONFIG_HPP
