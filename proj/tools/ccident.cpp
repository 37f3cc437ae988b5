// ccident: generate datasets, identify characteristic curves, run validation
// sweeps, family selection and architecture sweeps.

#include "ccident/harness.hpp"
#include "ccident/run_config.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using namespace ccident;

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kConfigError = 2;

struct Options {
  std::string system, preset, config, out, method, activation, family, data;
  std::string axis, values;
  std::optional<int> degree, neurons, layers;
  std::optional<unsigned> jobs;
  std::optional<double> threshold, ridge;
  std::optional<long> epochs;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--system", o.system, "Registry system name");
  cmd->add_option("--preset", o.preset, "Named parameter set");
  cmd->add_option("--config", o.config, "JSON config file");
  cmd->add_option("--method", o.method, "poly, sindy, nn or all")
      ->check(CLI::IsMember({"poly", "sindy", "nn", "all"}));
  cmd->add_option("--degree", o.degree, "Polynomial degree (poly and sindy)");
  cmd->add_option("--threshold", o.threshold, "STLSQ threshold");
  cmd->add_option("--ridge", o.ridge, "STLSQ ridge parameter");
  cmd->add_option("--epochs", o.epochs, "NN training epochs");
  cmd->add_option("--neurons", o.neurons, "Neurons per hidden layer");
  cmd->add_option("--layers", o.layers, "Hidden layers");
  cmd->add_option("--activation", o.activation, "Hidden-layer activation");
  cmd->add_option("--family", o.family, "position or velocity");
  cmd->add_option("--seed", o.seed, "Master seed");
  cmd->add_option("--jobs", o.jobs, "Worker threads");
  cmd->add_option("--out", o.out, "Output directory");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string quoted(const std::string& s) { return nlohmann::json(s).dump(); }

RunConfig configure(const Options& o) {
  ConfigSources src;
  src.preset = o.preset;
  src.system = o.system;
  if (!o.config.empty()) src.file_text = read_file(o.config);
  auto& ov = src.overrides;
  if (const char* env = std::getenv("CCIDENT_SEED")) {
    const std::string s = env;
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
      throw ConfigError("CCIDENT_SEED must be a non-negative integer, got '" + s + "'");
    ov.emplace_back("seed", s);
  }
  if (!o.method.empty())
    ov.emplace_back("methods", "[" + quoted(o.method) + "]");
  if (o.degree) {
    ov.emplace_back("poly.degree", std::to_string(*o.degree));
    ov.emplace_back("sindy.degree", std::to_string(*o.degree));
  }
  if (o.threshold) ov.emplace_back("sindy.threshold", nlohmann::json(*o.threshold).dump());
  if (o.ridge) ov.emplace_back("sindy.ridge", nlohmann::json(*o.ridge).dump());
  if (o.epochs) ov.emplace_back("nn.epochs", std::to_string(*o.epochs));
  if (o.neurons) ov.emplace_back("nn.neurons", std::to_string(*o.neurons));
  if (o.layers) ov.emplace_back("nn.layers", std::to_string(*o.layers));
  if (!o.activation.empty()) ov.emplace_back("nn.activation", quoted(o.activation));
  if (!o.family.empty()) ov.emplace_back("system.family", quoted(o.family));
  if (o.seed) ov.emplace_back("seed", std::to_string(*o.seed));
  if (o.jobs) ov.emplace_back("jobs", std::to_string(*o.jobs));
  if (!o.out.empty()) ov.emplace_back("out", quoted(o.out));
  if (!o.axis.empty()) ov.emplace_back("sweep_arch.axis", quoted(o.axis));
  if (!o.values.empty()) {
    nlohmann::json vals = nlohmann::json::array();
    std::stringstream ss(o.values);
    for (std::string v; std::getline(ss, v, ',');) vals.push_back(v);
    ov.emplace_back("sweep_arch.values", vals.dump());
  }
  return load_config(src);
}

fs::path prepare_out(const RunConfig& cfg) {
  const fs::path dir(cfg.out);
  fs::create_directories(dir);
  std::ofstream(dir / "resolved_config.json") << to_json_text(cfg);
  return dir;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  return f;
}

template <typename F>
void with_file(const fs::path& p, F&& write) {
  std::ofstream f = open_out(p);
  write(f);
}

Dataset training_data(const RunConfig& cfg, const Options& o) {
  if (!o.data.empty()) return with_estimated_derivatives(read_dataset_csv(o.data));
  return integrate(cfg.true_system().model(), cfg.forcing, cfg.init.x0,
                   cfg.init.v0, cfg.integrator)
      .data;
}

void log(const std::string& line) { std::cerr << line << '\n'; }

int cmd_generate(const RunConfig& cfg) {
  const fs::path dir = prepare_out(cfg);
  const TrueSystem sys = cfg.true_system();
  const Trajectory tr =
      integrate(sys.model(), cfg.forcing, cfg.init.x0, cfg.init.v0, cfg.integrator);
  write_dataset_csv((dir / "dataset.csv").string(), tr.data);
  const Eigen::VectorXd res = residual(tr.data, sys.model());
  nlohmann::ordered_json meta = {
      {"system", cfg.system},
      {"family", std::string(family_name(sys.family))},
      {"params", cfg.params},
      {"forcing",
       {{"amplitude", cfg.forcing.amplitude},
        {"omega", cfg.forcing.omega},
        {"eps_b", cfg.forcing.eps_b},
        {"form", cfg.forcing.form == ForcingForm::FHNComposite ? "fhn" : "cos"}}},
      {"init", {{"x0", cfg.init.x0}, {"v0", cfg.init.v0}}},
      {"seed", cfg.seed},
      {"samples", tr.data.size()},
      {"residual_max", res.maxCoeff()},
      {"steps_accepted", tr.stats.accepted},
      {"steps_rejected", tr.stats.rejected}};
  open_out(dir / "dataset.meta.json") << meta.dump(2) << '\n';
  std::cout << "wrote " << (dir / "dataset.csv").string() << " (" << tr.data.size()
            << " rows, max residual " << res.maxCoeff() << ")\n";
  return kOk;
}

int cmd_identify(const RunConfig& cfg, const Options& o) {
  const fs::path dir = prepare_out(cfg);
  const Dataset ds = training_data(cfg, o);
  const TrueSystem sys = cfg.true_system();
  const bool pos = cfg.family == ModelFamily::PositionFriction;
  int status = kOk;
  std::optional<CurveModel> poly_a, poly_b, sindy_a, sindy_b, nn_a, nn_b;
  for (Method m : cfg.methods) {
    try {
      const FitOutcome fit = identify(ds, cfg.family, m, cfg.settings, cfg.seed);
      std::cout << std::setprecision(6);
      switch (m) {
        case Method::Poly: {
          with_file(dir / "poly_coeffs.csv", [&](std::ostream& f) { write_poly_csv(f, *fit.poly); });
          std::cout << "poly: fit_residual=" << fit.score << " rank=" << fit.poly->rank
                    << "/" << fit.poly->columns
                    << (fit.poly->rank_deficient ? " (rank deficient)" : "") << '\n';
          poly_a = fit.model.cc_a;
          poly_b = fit.model.cc_b;
          break;
        }
        case Method::Sindy: {
          with_file(dir / "sindy_terms.csv", [&](std::ostream& f) { write_sindy_csv(f, *fit.sindy); });
          const long active = (fit.sindy->result.coeffs.array() != 0).count();
          std::cout << "sindy: active_terms=" << active << " fit_residual=" << fit.score
                    << " iterations=" << fit.sindy->result.iterations << '\n';
          if (!fit.sindy->result.warning.empty())
            log("sindy: warning: " + fit.sindy->result.warning);
          sindy_a = fit.model.cc_a;
          sindy_b = fit.model.cc_b;
          break;
        }
        case Method::NN: {
          with_file(dir / "nncc_model.txt", [&](std::ostream& f) { write_neural_model(f, *fit.nn); });
          auto hist = open_out(dir / "nn_history.csv");
          hist << "epoch,loss\n" << std::setprecision(17);
          for (const auto& [e, l] : fit.nn->history) hist << e << ',' << l << '\n';
          std::cout << "nn: final_loss=" << fit.score << " epochs=" << fit.nn->epochs
                    << '\n';
          nn_a = fit.model.cc_a;
          nn_b = fit.model.cc_b;
          break;
        }
      }
    } catch (const std::exception& e) {
      log("method " + std::string(method_name(m)) + ": " + e.what());
      status = kFailed;
    }
  }
  // Curve samples; the truth column only when the model family matches.
  const bool same_family = sys.family == cfg.family && o.data.empty();
  auto ptr = [](const std::optional<CurveModel>& c) { return c ? &*c : nullptr; };
  const Domain da = Domain::of(pos ? ds.x : ds.xdot), db = Domain::of(ds.x);
  if (da.width() > 0)
    with_file(dir / "cc_a_samples.csv", [&](std::ostream& f) {
      write_cc_samples(f, da, same_family ? &sys.cc_a : nullptr, ptr(nn_a),
                       ptr(poly_a), ptr(sindy_a));
    });
  if (db.width() > 0)
    with_file(dir / "cc_b_samples.csv", [&](std::ostream& f) {
      write_cc_samples(f, db, same_family ? &sys.cc_b : nullptr, ptr(nn_b),
                       ptr(poly_b), ptr(sindy_b));
    });
  return status;
}

int cmd_validate(const RunConfig& cfg) {
  const fs::path dir = prepare_out(cfg);
  const TrueSystem sys = cfg.true_system();
  SweepOptions opts;
  opts.methods = cfg.methods;
  opts.settings = cfg.settings;
  opts.integrator = cfg.integrator;
  opts.jobs = cfg.jobs;
  opts.progress = log;
  ExperimentReport report;
  if (cfg.protocol) {
    report = run_sweep(sys, *cfg.protocol, opts);
  } else {
    SweepCase c;
    c.train = {0, cfg.params, cfg.forcing, cfg.init, cfg.seed};
    c.validations = {cfg.validation};
    report = run_sweep(sys, {c}, opts, cfg.seed);
  }
  with_file(dir / "runs.csv", [&](std::ostream& f) { write_runs_csv(f, report); });
  with_file(dir / "summary.csv", [&](std::ostream& f) { write_summary_csv(f, report); });
  for (const auto& e : report.errors) log("error: " + e);
  std::cout << std::setprecision(4);
  for (const auto& s : report.stats)
    std::cout << method_name(s.method) << ": n=" << s.summary.count
              << " median=" << s.summary.median << " mean=" << s.summary.mean
              << " diverged=" << s.diverged << " failed=" << s.failed << '\n';
  return report.any_failed() ? kFailed : kOk;
}

int cmd_select_family(const RunConfig& cfg) {
  const fs::path dir = prepare_out(cfg);
  const TrueSystem sys = cfg.true_system();
  auto csv = open_out(dir / "family_selection.csv");
  csv << "method,rank,family,rmse,diverged,fit_score,inconclusive,non_discriminative\n"
      << std::setprecision(17);
  int status = kOk;
  for (Method m : cfg.methods) {
    const FamilySelection sel = select_family(sys, cfg.training(), cfg.validation, m,
                                              cfg.settings, cfg.integrator, cfg.seed);
    std::cout << method_name(m) << ": winner=" << family_name(sel.winner);
    if (sel.inconclusive) std::cout << " (inconclusive: both simulations failed)";
    if (sel.non_discriminative)
      std::cout << " (non-discriminative: validation equals training)";
    std::cout << '\n';
    for (std::size_t r = 0; r < sel.ranked.size(); ++r) {
      const FamilyScore& s = sel.ranked[r];
      std::cout << "  " << r + 1 << ". " << family_name(s.family) << " rmse="
                << std::setprecision(4) << s.rmse << (s.diverged ? " (diverged)" : "")
                << '\n';
      csv << method_name(m) << ',' << r + 1 << ',' << family_name(s.family) << ','
          << s.rmse << ',' << s.diverged << ',' << s.fit_score << ','
          << sel.inconclusive << ',' << sel.non_discriminative << '\n';
    }
    if (sel.inconclusive) status = kFailed;
  }
  return status;
}

int cmd_sweep_arch(const RunConfig& cfg, const Options& o) {
  const fs::path dir = prepare_out(cfg);
  const Dataset ds = training_data(cfg, o);
  TrainConfig base = cfg.settings.nn;
  base.seed = cfg.seed;
  const auto rows =
      sweep_architecture(ds, cfg.family, cfg.axis, cfg.arch_values, base, log);
  with_file(dir / ("arch_" + std::string(arch_axis_name(cfg.axis)) + ".csv"),
            [&](std::ostream& f) { write_arch_csv(f, cfg.axis, rows); });
  int status = kOk;
  for (const auto& r : rows) {
    std::cout << arch_axis_name(cfg.axis) << '=' << r.value << " loss="
              << std::setprecision(4) << r.final_loss << " time=" << r.seconds << "s";
    if (!r.error.empty()) {
      std::cout << " error: " << r.error;
      status = kFailed;
    }
    std::cout << '\n';
  }
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Characteristic-curve identification of second-order oscillators"};
  app.require_subcommand(1);
  Options o;

  auto* gen = app.add_subcommand("generate", "Integrate a system and write its dataset");
  auto* ident = app.add_subcommand("identify", "Fit characteristic curves to a dataset");
  auto* val = app.add_subcommand("validate", "Train/validate RMSE sweep");
  auto* sel = app.add_subcommand("select-family", "Compare both model families");
  auto* arch = app.add_subcommand("sweep-arch", "NN-CC architecture sweep");
  for (auto* c : {gen, ident, val, sel, arch}) add_common(c, o);
  for (auto* c : {ident, arch})
    c->add_option("--data", o.data, "Dataset CSV (default: generate from config)");
  arch->add_option("--axis", o.axis, "neurons, layers or activation");
  arch->add_option("--values", o.values, "Comma-separated axis values");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  RunConfig cfg;
  try {
    cfg = configure(o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  }

  try {
    if (gen->parsed()) return cmd_generate(cfg);
    if (ident->parsed()) return cmd_identify(cfg, o);
    if (val->parsed()) return cmd_validate(cfg);
    if (sel->parsed()) return cmd_select_family(cfg);
    if (arch->parsed()) return cmd_sweep_arch(cfg, o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailed;
  }
  return kOk;
}
