// Experiment orchestration: identification wrappers, train/validate RMSE
// sweeps, family selection, architecture sweeps and report CSVs.

#ifndef CCIDENT_HARNESS_HPP
#define CCIDENT_HARNESS_HPP

#include "ccident/nn_cc.hpp"
#include "ccident/odesim.hpp"
#include "ccident/poly_cc.hpp"
#include "ccident/sindy_cc.hpp"
#include "ccident/systems.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ccident {

/// sqrt(mean((pred - truth)^2)). Throws std::invalid_argument on length
/// mismatch or empty input.
double rmse(const Eigen::Ref<const Eigen::VectorXd>& pred,
            const Eigen::Ref<const Eigen::VectorXd>& truth);

/// Quantiles by linear interpolation between order statistics (type 7).
double quantile(std::vector<double> values, double p);

struct Summary {
  std::size_t count = 0;
  double min = NAN, q1 = NAN, median = NAN, q3 = NAN, max = NAN, mean = NAN;

  static Summary of(const std::vector<double>& values);
  bool operator==(const Summary&) const = default;
};

enum class Method { Poly, Sindy, NN };
std::string_view method_name(Method m);
Method parse_method(std::string_view s);
inline const std::vector<Method>& all_methods() {
  static const std::vector<Method> m{Method::Poly, Method::Sindy, Method::NN};
  return m;
}

struct MethodSettings {
  int poly_degree = 10;
  SindyParams sindy;
  TrainConfig nn;
};

/// Result of one identification; exactly one of the fit slots is set.
struct FitOutcome {
  Method method = Method::Poly;
  IdentifiedModel model;
  double score = 0;  // fit residual (poly, sindy) or final loss (nn)
  std::optional<PolyFit> poly;
  std::optional<SindyFit> sindy;
  std::optional<NeuralFit> nn;
};

/// `seed` replaces settings.nn.seed for NN fits.
FitOutcome identify(const Dataset& ds, ModelFamily family, Method method,
                    const MethodSettings& settings, std::uint64_t seed);

struct RunRecord {
  Method method = Method::Poly;
  std::size_t train_idx = 0, val_idx = 0;
  double rmse = NAN;
  bool diverged = false;
  std::uint64_t seed = 0;
  bool operator==(const RunRecord&) const = default;
};

struct MethodStats {
  Method method = Method::Poly;
  Summary summary;           // over non-diverged runs
  std::size_t diverged = 0;  // validation simulations that failed
  std::size_t failed = 0;    // runs lost to fit or ground-truth failures
};

struct ExperimentReport {
  std::string system;
  std::uint64_t master_seed = 0;
  std::vector<RunRecord> runs;  // ordered by (train_idx, val_idx, method)
  std::vector<MethodStats> stats;
  std::vector<std::string> errors;  // one line per failed fit or truth run

  const MethodStats& stats_for(Method m) const;
  bool any_failed() const;
};

/// One training configuration with its validation draws.
struct SweepCase {
  TrainingConfig train;
  std::vector<ValidationConfig> validations;
};

struct SweepOptions {
  std::vector<Method> methods = all_methods();
  MethodSettings settings;
  IntegratorConfig integrator;
  unsigned jobs = 1;
  /// Called once per (train, validation, method) cell, serialized.
  std::function<void(const std::string&)> progress;
};

/// For each case: generate the training dataset, fit every method, simulate
/// each fitted model on every validation config and score its RMSE against
/// the true system. Cases run on a pool of `jobs` threads; the report does
/// not depend on scheduling.
ExperimentReport run_sweep(const TrueSystem& system,
                           const std::vector<SweepCase>& cases,
                           const SweepOptions& opts,
                           std::uint64_t master_seed = 0);

ExperimentReport run_sweep(const TrueSystem& system,
                           const SamplingProtocol& protocol,
                           const SweepOptions& opts);

struct FamilyScore {
  ModelFamily family = ModelFamily::PositionFriction;
  double rmse = INFINITY;  // infinity when the simulation failed
  bool diverged = false;
  double fit_score = 0;
};

struct FamilySelection {
  std::vector<FamilyScore> ranked;  // best first
  ModelFamily winner = ModelFamily::PositionFriction;
  bool inconclusive = false;        // both simulations failed
  bool non_discriminative = false;  // validation config == training config
};

/// Fits both families on the training dataset and scores each against the
/// true system on the validation configuration.
FamilySelection select_family(const TrueSystem& system,
                              const ValidationConfig& train_config,
                              const ValidationConfig& val_config,
                              Method method, const MethodSettings& settings,
                              const IntegratorConfig& integrator = {},
                              std::uint64_t seed = 0);

enum class ArchAxis { Neurons, Layers, Activation };
std::string_view arch_axis_name(ArchAxis a);
ArchAxis parse_arch_axis(std::string_view s);
std::vector<std::string> default_arch_values(ArchAxis a);

struct ArchRow {
  std::string value;
  double final_loss = NAN;
  double seconds = 0;
  std::string error;  // empty on success
};

/// Trains one NN-CC per value along `axis`, everything else from `base`.
std::vector<ArchRow> sweep_architecture(
    const Dataset& ds, ModelFamily family, ArchAxis axis,
    const std::vector<std::string>& values, const TrainConfig& base,
    const std::function<void(const std::string&)>& progress = {});

/// CSV `method,train_idx,val_idx,rmse,diverged,seed`.
void write_runs_csv(std::ostream& os, const ExperimentReport& report);
/// CSV `method,count,diverged,failed,min,q1,median,q3,max,mean`.
void write_summary_csv(std::ostream& os, const ExperimentReport& report);
/// CSV `value,final_loss,wall_time_s,error`.
void write_arch_csv(std::ostream& os, ArchAxis axis,
                    const std::vector<ArchRow>& rows);

/// CSV `z,f_true,f_nn,f_poly,f_sindy` on `points` uniform abscissae over
/// `domain` widened 1.5x about its centre. Absent curves leave empty fields.
void write_cc_samples(std::ostream& os, const Domain& domain,
                      const CurveModel* truth, const CurveModel* nn,
                      const CurveModel* poly, const CurveModel* sindy,
                      int points = 400);

}  // namespace ccident

#endif  // CCIDENT_HARNESS_HPP
