#include "ccident/harness.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <bit>
#include <cmath>
#include <sstream>

using namespace ccident;

namespace {

MethodSettings quick_settings() {
  MethodSettings s;
  s.nn.neurons = 8;
  s.nn.max_epochs = 40;
  return s;
}

std::vector<SweepCase> vdp_cases(int n_train, int n_val) {
  SamplingProtocol p = van_der_pol_protocol(21);
  p.n_train = n_train;
  p.n_val_per_train = n_val;
  std::vector<SweepCase> cases;
  for (const auto& tc : sample_training_configs(p, make_system("van_der_pol")))
    cases.push_back({tc, sample_validation_configs(p, tc)});
  return cases;
}

int count_lines(const std::string& s) {
  int n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("rmse") {
  Eigen::VectorXd a(4), b(4);
  a << 1, 2, 3, 4;
  b << 1, 2, 3, 6;
  CHECK(rmse(a, b) == doctest::Approx(1.0));
  CHECK(rmse(a, a) == 0.0);
  CHECK_THROWS_AS(rmse(a, b.head(3)), std::invalid_argument);
  CHECK_THROWS_AS(rmse(a.head(0), b.head(0)), std::invalid_argument);
}

TEST_CASE("quantiles match numpy's default") {
  const std::vector<double> v{3.2, 0.1, 7.7, 1.5, 2.5, 9.1, 4.4};
  CHECK(quantile(v, 0) == 0.1);
  CHECK(quantile(v, 0.25) == doctest::Approx(2.0));
  CHECK(quantile(v, 0.5) == doctest::Approx(3.2));
  CHECK(quantile(v, 0.75) == doctest::Approx(6.05));
  CHECK(quantile(v, 1) == 9.1);
  const Summary s = Summary::of(v);
  CHECK(s.count == 7);
  CHECK(s.mean == doctest::Approx(4.0714285714285712));
  CHECK(s.median == doctest::Approx(3.2));
  CHECK(std::isnan(Summary::of({}).median));
}

TEST_CASE("method names") {
  for (Method m : all_methods()) CHECK(parse_method(method_name(m)) == m);
  CHECK_THROWS_AS(parse_method("gp"), std::invalid_argument);
}

TEST_CASE("identify fills the matching slot") {
  const Dataset ds = test::default_dataset("van_der_pol");
  const FitOutcome p = identify(ds, ModelFamily::PositionFriction, Method::Poly,
                                quick_settings(), 0);
  CHECK(p.poly.has_value());
  CHECK_FALSE(p.nn.has_value());
  const FitOutcome n = identify(ds, ModelFamily::PositionFriction, Method::NN,
                                quick_settings(), 99);
  REQUIRE(n.nn.has_value());
  CHECK(n.nn->config.seed == 99);
  CHECK(n.score == n.nn->final_loss);
}

TEST_CASE("single-cell sweep") {
  const auto cases = vdp_cases(1, 1);
  SweepOptions opts;
  opts.settings = quick_settings();
  int calls = 0;
  opts.progress = [&](const std::string& line) {
    ++calls;
    CHECK(line.rfind("cell ", 0) == 0);
  };
  const ExperimentReport r = run_sweep(make_system("van_der_pol"), cases, opts, 21);
  REQUIRE(r.runs.size() == 3);
  CHECK(calls == 3);
  CHECK(r.runs[0].method == Method::Poly);
  CHECK(r.runs[2].method == Method::NN);
  CHECK(r.runs[0].seed == cases[0].train.seed);
  for (const auto& run : r.runs)
    if (!run.diverged) CHECK(std::isfinite(run.rmse));
  CHECK(r.stats.size() == 3);
  CHECK_FALSE(r.any_failed());
}

TEST_CASE("sweep results do not depend on the thread count") {
  const auto cases = vdp_cases(3, 2);
  SweepOptions opts;
  opts.settings = quick_settings();
  opts.methods = {Method::Poly, Method::NN};
  const ExperimentReport one = run_sweep(make_system("van_der_pol"), cases, opts);
  opts.jobs = 3;
  const ExperimentReport three = run_sweep(make_system("van_der_pol"), cases, opts);
  CHECK(one.runs.size() == 12);
  for (std::size_t i = 0; i < one.runs.size(); ++i) {
    INFO("run ", i, " rmse ", one.runs[i].rmse, " vs ", three.runs[i].rmse);
    CHECK(one.runs[i].method == three.runs[i].method);
    CHECK(one.runs[i].diverged == three.runs[i].diverged);
    CHECK(one.runs[i].seed == three.runs[i].seed);
    CHECK(std::bit_cast<std::uint64_t>(one.runs[i].rmse) ==
          std::bit_cast<std::uint64_t>(three.runs[i].rmse));
  }
  std::ostringstream a, b;
  write_runs_csv(a, one);
  write_runs_csv(b, three);
  CHECK(a.str() == b.str());
}

TEST_CASE("fit failures are counted, not fatal") {
  auto cases = vdp_cases(2, 2);
  // At rest with no forcing the trajectory is constant and nothing can be fit.
  cases[1].train.forcing = ForcingSpec::zero();
  cases[1].train.init = {0, 0};
  SweepOptions opts;
  opts.methods = {Method::Poly, Method::Sindy};
  const ExperimentReport r = run_sweep(make_system("van_der_pol"), cases, opts);
  CHECK(r.any_failed());
  CHECK(r.stats_for(Method::Poly).failed == 2);
  CHECK(r.stats_for(Method::Poly).summary.count == 2);
  CHECK_FALSE(r.errors.empty());
  for (const auto& run : r.runs)
    if (run.train_idx == 1 && run.method == Method::Poly) {
      CHECK(std::isnan(run.rmse));
      CHECK(run.diverged);
    }
}

TEST_CASE("summary CSV layout") {
  const auto cases = vdp_cases(1, 2);
  SweepOptions opts;
  opts.methods = {Method::Sindy};
  const ExperimentReport r = run_sweep(make_system("van_der_pol"), cases, opts);
  std::ostringstream os;
  write_summary_csv(os, r);
  CHECK(os.str().rfind("method,count,diverged,failed,min,q1,median,q3,max,mean\nsindy,2,0,0,", 0) == 0);
}

TEST_CASE("family selection") {
  const TrueSystem s = make_system("van_der_pol");
  const ValidationConfig train{s.default_forcing, s.default_init};
  const ValidationConfig val{ForcingSpec::harmonic(1.384, 1.578), {0.458, 0.033}};
  const FamilySelection sel =
      select_family(s, train, val, Method::Poly, MethodSettings{});
  CHECK(sel.winner == ModelFamily::PositionFriction);
  REQUIRE(sel.ranked.size() == 2);
  CHECK(sel.ranked[0].rmse < sel.ranked[1].rmse);
  CHECK_FALSE(sel.non_discriminative);

  const FamilySelection same =
      select_family(s, train, train, Method::Sindy, MethodSettings{});
  CHECK(same.non_discriminative);
}

TEST_CASE("architecture sweep") {
  const Dataset ds = test::default_dataset("van_der_pol");
  TrainConfig base;
  base.max_epochs = 20;
  const auto rows = sweep_architecture(ds, ModelFamily::PositionFriction,
                                       ArchAxis::Neurons, {"4", "9"}, base);
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].value == "9");
  CHECK(std::isfinite(rows[0].final_loss));
  CHECK(rows[0].error.empty());
  CHECK_THROWS_AS(sweep_architecture(ds, ModelFamily::PositionFriction,
                                     ArchAxis::Layers, {"0"}, base),
                  std::invalid_argument);
  CHECK(default_arch_values(ArchAxis::Activation).size() == 10);
  std::ostringstream os;
  write_arch_csv(os, ArchAxis::Neurons, rows);
  CHECK(os.str().rfind("neurons,final_loss,wall_time_s,error\n4,", 0) == 0);
}

TEST_CASE("curve samples widen the domain") {
  const TrueSystem s = make_system("van_der_pol");
  std::ostringstream os;
  write_cc_samples(os, {-1, 1}, &s.cc_a, nullptr, &s.cc_a, nullptr, 5);
  CHECK(count_lines(os.str()) == 6);
  CHECK(os.str().find("\n-1.5,") != std::string::npos);
  CHECK(os.str().find("\n1.5,") != std::string::npos);
  CHECK(os.str().find(",,") != std::string::npos);
  CHECK_THROWS_AS(write_cc_samples(os, {}, nullptr, nullptr, nullptr, nullptr),
                  std::invalid_argument);
}

}
