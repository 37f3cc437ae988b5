#include "ccident/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

namespace ccident {

double rmse(const Eigen::Ref<const Eigen::VectorXd>& pred,
            const Eigen::Ref<const Eigen::VectorXd>& truth) {
  if (pred.size() != truth.size())
    throw std::invalid_argument("rmse: length mismatch (" +
                                std::to_string(pred.size()) + " vs " +
                                std::to_string(truth.size()) + ")");
  if (pred.size() == 0) throw std::invalid_argument("rmse: empty series");
  return std::sqrt((pred - truth).squaredNorm() / double(pred.size()));
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) return NAN;
  std::sort(values.begin(), values.end());
  const double h = (double(values.size()) - 1) * p;
  const auto lo = std::size_t(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - double(lo)) * (values[hi] - values[lo]);
}

Summary Summary::of(const std::vector<double>& values) {
  Summary s;
  s.count = values.size();
  if (values.empty()) return s;
  std::vector<double> v = values;
  std::sort(v.begin(), v.end());
  s.min = v.front();
  s.max = v.back();
  s.q1 = quantile(v, 0.25);
  s.median = quantile(v, 0.5);
  s.q3 = quantile(v, 0.75);
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
  return s;
}

std::string_view method_name(Method m) {
  switch (m) {
    case Method::Poly: return "poly";
    case Method::Sindy: return "sindy";
    case Method::NN: return "nn";
  }
  return "?";
}

Method parse_method(std::string_view s) {
  for (Method m : all_methods())
    if (method_name(m) == s) return m;
  throw std::invalid_argument("unknown method '" + std::string(s) +
                              "' (known: poly, sindy, nn)");
}

FitOutcome identify(const Dataset& ds, ModelFamily family, Method method,
                    const MethodSettings& settings, std::uint64_t seed) {
  FitOutcome out;
  out.method = method;
  switch (method) {
    case Method::Poly:
      out.poly = fit_poly(ds, family, settings.poly_degree);
      out.model = out.poly->model;
      out.score = out.poly->fit_residual;
      break;
    case Method::Sindy:
      out.sindy = fit_sindy(ds, family, settings.sindy);
      out.model = out.sindy->model;
      out.score = out.sindy->fit_residual;
      break;
    case Method::NN: {
      TrainConfig cfg = settings.nn;
      cfg.seed = seed;
      out.nn = train(ds, family, cfg);
      out.model = out.nn->model;
      out.score = out.nn->final_loss;
      break;
    }
  }
  return out;
}

const MethodStats& ExperimentReport::stats_for(Method m) const {
  for (const auto& s : stats)
    if (s.method == m) return s;
  throw std::invalid_argument("report has no method " +
                              std::string(method_name(m)));
}

bool ExperimentReport::any_failed() const {
  for (const auto& s : stats)
    if (s.failed) return true;
  return false;
}

namespace {

struct CaseResult {
  std::vector<RunRecord> runs;
  std::vector<bool> failed;  // parallel to runs
  std::vector<std::string> errors;
};

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

ExperimentReport run_sweep(const TrueSystem& system,
                           const std::vector<SweepCase>& cases,
                           const SweepOptions& opts,
                           std::uint64_t master_seed) {
  std::size_t total = 0;
  for (const auto& c : cases) total += c.validations.size() * opts.methods.size();

  std::vector<CaseResult> results(cases.size());
  std::atomic<std::size_t> next{0};
  std::size_t done = 0;
  std::mutex progress_mutex;

  auto report_cell = [&](Method m, double value) {
    std::lock_guard lock(progress_mutex);
    ++done;
    if (opts.progress)
      opts.progress("cell " + std::to_string(done) + "/" + std::to_string(total) +
                    " method=" + std::string(method_name(m)) +
                    " rmse=" + format_double(value));
  };

  auto run_case = [&](std::size_t i) {
    const SweepCase& sc = cases[i];
    CaseResult& res = results[i];
    const std::size_t nv = sc.validations.size();
    const std::size_t nm = opts.methods.size();
    res.runs.resize(nv * nm);
    res.failed.assign(nv * nm, false);
    for (std::size_t j = 0; j < nv; ++j)
      for (std::size_t k = 0; k < nm; ++k)
        res.runs[j * nm + k] = {opts.methods[k], sc.train.index, j, NAN, false,
                                sc.train.seed};

    auto fail = [&](std::size_t j, std::size_t k, const std::string& why) {
      RunRecord& r = res.runs[j * nm + k];
      r.diverged = true;
      res.failed[j * nm + k] = true;
      res.errors.push_back(why);
      report_cell(r.method, NAN);
    };

    const TrueSystem truth_sys = make_system(system.name, sc.train.params);
    Dataset train_ds;
    try {
      train_ds = integrate(truth_sys.model(), sc.train.forcing, sc.train.init.x0,
                           sc.train.init.v0, opts.integrator)
                     .data;
    } catch (const std::exception& e) {
      for (std::size_t j = 0; j < nv; ++j)
        for (std::size_t k = 0; k < nm; ++k)
          fail(j, k, "train " + std::to_string(sc.train.index) +
                         ": training data generation failed: " + e.what());
      return;
    }

    std::vector<std::optional<Dataset>> truths(nv);
    for (std::size_t j = 0; j < nv; ++j) {
      const ValidationConfig& v = sc.validations[j];
      try {
        truths[j] = integrate(truth_sys.model(), v.forcing, v.init.x0,
                              v.init.v0, opts.integrator)
                        .data;
      } catch (const std::exception& e) {
        res.errors.push_back("train " + std::to_string(sc.train.index) +
                             " val " + std::to_string(j) +
                             ": ground truth failed: " + e.what());
      }
    }

    for (std::size_t k = 0; k < nm; ++k) {
      const Method m = opts.methods[k];
      std::optional<FitOutcome> fit;
      std::string fit_error;
      try {
        fit = identify(train_ds, truth_sys.family, m, opts.settings,
                       sc.train.seed);
      } catch (const std::exception& e) {
        fit_error = "train " + std::to_string(sc.train.index) + " method " +
                    std::string(method_name(m)) + ": fit failed: " + e.what();
      }
      for (std::size_t j = 0; j < nv; ++j) {
        if (!fit) {
          fail(j, k, fit_error);
          continue;
        }
        if (!truths[j]) {
          RunRecord& r = res.runs[j * nm + k];
          r.diverged = true;
          res.failed[j * nm + k] = true;
          report_cell(m, NAN);
          continue;
        }
        RunRecord& r = res.runs[j * nm + k];
        const ValidationConfig& v = sc.validations[j];
        try {
          const Trajectory sim = simulate_identified(
              fit->model, v.forcing, v.init.x0, v.init.v0, opts.integrator);
          r.rmse = rmse(sim.data.x, truths[j]->x);
          if (!std::isfinite(r.rmse)) r.diverged = true;
        } catch (const IntegrationError&) {
          r.diverged = true;
        }
        report_cell(m, r.rmse);
      }
    }
  };

  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < cases.size();) {
      try {
        run_case(i);
      } catch (const std::exception& e) {
        CaseResult& res = results[i];
        res.errors.push_back("train " + std::to_string(cases[i].train.index) +
                             ": " + e.what());
        for (std::size_t r = 0; r < res.runs.size(); ++r) {
          if (!std::isnan(res.runs[r].rmse)) continue;
          res.runs[r].diverged = true;
          res.failed[r] = true;
        }
      }
    }
  };

  const unsigned jobs = std::max(1u, std::min<unsigned>(
                                         opts.jobs, unsigned(cases.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  ExperimentReport report;
  report.system = system.name;
  report.master_seed = master_seed;
  for (Method m : opts.methods) report.stats.push_back({m, {}, 0, 0});
  std::vector<std::vector<double>> values(opts.methods.size());
  for (const auto& res : results) {
    for (std::size_t r = 0; r < res.runs.size(); ++r) {
      const RunRecord& run = res.runs[r];
      const std::size_t k = r % opts.methods.size();
      if (res.failed[r]) ++report.stats[k].failed;
      else if (run.diverged) ++report.stats[k].diverged;
      else values[k].push_back(run.rmse);
      report.runs.push_back(run);
    }
    report.errors.insert(report.errors.end(), res.errors.begin(), res.errors.end());
  }
  for (std::size_t k = 0; k < opts.methods.size(); ++k)
    report.stats[k].summary = Summary::of(values[k]);
  return report;
}

ExperimentReport run_sweep(const TrueSystem& system,
                           const SamplingProtocol& protocol,
                           const SweepOptions& opts) {
  std::vector<SweepCase> cases;
  for (auto& tc : sample_training_configs(protocol, system)) {
    auto vals = sample_validation_configs(protocol, tc);
    cases.push_back({std::move(tc), std::move(vals)});
  }
  return run_sweep(system, cases, opts, protocol.rng_seed);
}

FamilySelection select_family(const TrueSystem& system,
                              const ValidationConfig& train_config,
                              const ValidationConfig& val_config,
                              Method method, const MethodSettings& settings,
                              const IntegratorConfig& integrator,
                              std::uint64_t seed) {
  const Dataset train_ds =
      integrate(system.model(), train_config.forcing, train_config.init.x0,
                train_config.init.v0, integrator)
          .data;
  const Dataset truth =
      integrate(system.model(), val_config.forcing, val_config.init.x0,
                val_config.init.v0, integrator)
          .data;

  FamilySelection sel;
  for (ModelFamily fam :
       {ModelFamily::PositionFriction, ModelFamily::VelocityFriction}) {
    FamilyScore score;
    score.family = fam;
    try {
      const FitOutcome fit = identify(train_ds, fam, method, settings, seed);
      score.fit_score = fit.score;
      const Trajectory sim = simulate_identified(
          fit.model, val_config.forcing, val_config.init.x0,
          val_config.init.v0, integrator);
      score.rmse = rmse(sim.data.x, truth.x);
      if (!std::isfinite(score.rmse)) {
        score.rmse = INFINITY;
        score.diverged = true;
      }
    } catch (const IntegrationError&) {
      score.diverged = true;
    } catch (const TrainingFailure&) {
      score.diverged = true;
    } catch (const InvalidData&) {
      score.diverged = true;
    }
    sel.ranked.push_back(score);
  }
  std::stable_sort(sel.ranked.begin(), sel.ranked.end(),
                   [](const FamilyScore& a, const FamilyScore& b) {
                     if (a.diverged != b.diverged) return !a.diverged;
                     return a.rmse < b.rmse;
                   });
  sel.winner = sel.ranked.front().family;
  sel.inconclusive = sel.ranked[0].diverged && sel.ranked[1].diverged;
  sel.non_discriminative = train_config == val_config;
  return sel;
}

std::string_view arch_axis_name(ArchAxis a) {
  switch (a) {
    case ArchAxis::Neurons: return "neurons";
    case ArchAxis::Layers: return "layers";
    case ArchAxis::Activation: return "activation";
  }
  return "?";
}

ArchAxis parse_arch_axis(std::string_view s) {
  for (ArchAxis a : {ArchAxis::Neurons, ArchAxis::Layers, ArchAxis::Activation})
    if (arch_axis_name(a) == s) return a;
  throw std::invalid_argument("unknown sweep axis '" + std::string(s) +
                              "' (known: neurons, layers, activation)");
}

std::vector<std::string> default_arch_values(ArchAxis a) {
  switch (a) {
    case ArchAxis::Neurons: return {"10", "20", "50", "100", "150", "200"};
    case ArchAxis::Layers: return {"1", "2", "3", "4"};
    case ArchAxis::Activation: {
      std::vector<std::string> out;
      for (Activation act : all_activations())
        out.emplace_back(activation_name(act));
      return out;
    }
  }
  return {};
}

namespace {

int parse_positive(const std::string& s, const char* what) {
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || v <= 0)
    throw std::invalid_argument(std::string(what) + " must be a positive integer, got '" + s + "'");
  return v;
}

}  // namespace

std::vector<ArchRow> sweep_architecture(
    const Dataset& ds, ModelFamily family, ArchAxis axis,
    const std::vector<std::string>& values, const TrainConfig& base,
    const std::function<void(const std::string&)>& progress) {
  std::vector<TrainConfig> cfgs;
  for (const auto& v : values) {
    TrainConfig c = base;
    switch (axis) {
      case ArchAxis::Neurons: c.neurons = parse_positive(v, "neurons"); break;
      case ArchAxis::Layers: c.hidden_layers = parse_positive(v, "layers"); break;
      case ArchAxis::Activation: c.activation = parse_activation(v); break;
    }
    cfgs.push_back(c);
  }
  std::vector<ArchRow> rows;
  for (std::size_t i = 0; i < cfgs.size(); ++i) {
    ArchRow row;
    row.value = values[i];
    const auto t0 = std::chrono::steady_clock::now();
    try {
      row.final_loss = train(ds, family, cfgs[i]).final_loss;
    } catch (const TrainingFailure& e) {
      row.error = e.what();
    }
    row.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (progress)
      progress("cell " + std::to_string(i + 1) + "/" + std::to_string(cfgs.size()) +
               " " + std::string(arch_axis_name(axis)) + "=" + row.value +
               " loss=" + format_double(row.final_loss));
    rows.push_back(row);
  }
  return rows;
}

void write_runs_csv(std::ostream& os, const ExperimentReport& report) {
  os << "method,train_idx,val_idx,rmse,diverged,seed\n" << std::setprecision(17);
  for (const auto& r : report.runs)
    os << method_name(r.method) << ',' << r.train_idx << ',' << r.val_idx << ','
       << r.rmse << ',' << (r.diverged ? 1 : 0) << ',' << r.seed << '\n';
}

void write_summary_csv(std::ostream& os, const ExperimentReport& report) {
  os << "method,count,diverged,failed,min,q1,median,q3,max,mean\n"
     << std::setprecision(17);
  for (const auto& s : report.stats)
    os << method_name(s.method) << ',' << s.summary.count << ',' << s.diverged
       << ',' << s.failed << ',' << s.summary.min << ',' << s.summary.q1 << ','
       << s.summary.median << ',' << s.summary.q3 << ',' << s.summary.max << ','
       << s.summary.mean << '\n';
}

void write_arch_csv(std::ostream& os, ArchAxis axis,
                    const std::vector<ArchRow>& rows) {
  os << arch_axis_name(axis) << ",final_loss,wall_time_s,error\n"
     << std::setprecision(17);
  for (const auto& r : rows) {
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    os << r.value << ',' << r.final_loss << ',' << std::setprecision(4)
       << r.seconds << std::setprecision(17) << ',' << err << '\n';
  }
}

void write_cc_samples(std::ostream& os, const Domain& domain,
                      const CurveModel* truth, const CurveModel* nn,
                      const CurveModel* poly, const CurveModel* sindy,
                      int points) {
  if (!domain.bounded() || points < 2)
    throw std::invalid_argument("cc samples need a bounded domain and >= 2 points");
  const double half = 0.75 * domain.width();
  const Eigen::VectorXd z =
      uniform_grid(domain.center() - half, domain.center() + half, points);
  os << "z,f_true,f_nn,f_poly,f_sindy\n" << std::setprecision(17);
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    os << z[i];
    for (const CurveModel* c : {truth, nn, poly, sindy}) {
      os << ',';
      if (c) os << (*c)(z[i]);
    }
    os << '\n';
  }
}

}  // namespace ccident
