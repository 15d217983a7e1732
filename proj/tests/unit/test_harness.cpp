#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "adcons/harness.hpp"
#include "adcons/problems.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace adcons;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_consensus() {
  ExperimentConfig c;
  c.n = {12};
  c.p = {0.5};
  c.kappa = {0.5};
  c.tau = {5};
  c.trials = 2;
  c.max_iters = 3000;
  c.tolerance = 1e-8;
  c.dim = 3;
  return c;
}

std::string summary_text(const SweepResult& r) {
  std::ostringstream s;
  write_summary_csv(s, r.summary);
  write_summary_csv(s, r.baseline);
  return s.str();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("trace csv schema") {
  CHECK(std::string(kTraceHeader) == "k,comm_volume,comm_rounds,consensus_error,optimality_error,spectral_gap,status");
  RunTrace t;
  t.rows.push_back(TraceRow{0, 0, 0, 0.1, std::nullopt, std::nullopt, ""});
  t.rows.push_back(TraceRow{1, 8, 1, 1.0 / 3, 2.5, 0.25, "converged"});
  std::ostringstream out;
  write_trace_csv(out, t);
  CHECK(out.str() == std::string(kTraceHeader) + "\n0,0,0,0.10000000000000001,,,\n1,8,1,0.33333333333333331,2.5,0.25,converged\n");
  CHECK(format_real(std::nan("")) == "nan");
  CHECK(format_tau(kTauInfinite) == "inf");
  CHECK(format_beta(Beta::greedy()) == "greedy");
}

TEST_CASE("config parsing") {
  ExperimentConfig c = parse_config(R"({"n": 16, "kappa": [0.1, 0.5], "tau": ["inf", 3], "beta": ["greedy", 2]})");
  CHECK(c.n == std::vector<std::size_t>{16});
  CHECK(c.kappa.size() == 2);
  CHECK(c.tau[0] == kTauInfinite);
  CHECK(c.tau[1] == 3);
  CHECK(c.beta[0].is_greedy());
  CHECK(c.beta[1].value() == 2.0);
  CHECK(c.algorithm == Algorithm::AC);
  CHECK(parse_config(R"({"scenario": "linreg"})").algorithm == Algorithm::ACGT);

  CHECK_THROWS_AS(parse_config(R"({"kapa": 0.5})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"kappa": 2})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"n": []})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"tau": 0})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"trials": "many"})"), ConfigError);
  CHECK_THROWS_AS(parse_config("{not json"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"scenario": "logreg"})"), ConfigError);  // needs data

  ExperimentConfig round = parse_config(config_to_json(c));
  CHECK(config_to_json(round) == config_to_json(c));
}

TEST_CASE("grid expansion order") {
  ExperimentConfig c;
  c.n = {8, 16};
  c.kappa = {0.2, 0.4, 0.6};
  c.tau = {1, 5};
  auto grid = expand_grid(c);
  CHECK(grid.size() == 12);
  CHECK(grid[0].n == 8);
  CHECK(grid[1].tau == 5);
  CHECK(grid[2].kappa == 0.4);
  CHECK(grid[6].n == 16);
  c.alpha = {0.1, 0.2};
  CHECK(expand_grid(c).size() == 12);  // alpha only spans optimization grids
  c.scenario = Scenario::Linreg;
  CHECK(expand_grid(c).size() == 24);
}

TEST_CASE("sweep: one summary row per grid point") {
  ExperimentConfig c = small_consensus();
  c.kappa = {0.25, 0.5, 0.75};
  c.tau = {2, 10};
  c.trials = 3;
  SweepResult r = run_sweep(c);
  CHECK(r.grid.size() == 6);
  CHECK(r.summary.size() == 6);
  CHECK(r.runs.size() == 18);
  for (const auto& s : r.summary) {
    CHECK(s.trials == 3);
    CHECK(s.status == "ok");
  }
  CHECK(r.baseline.size() == 1);
}

TEST_CASE("sweep: kappa 0 equals the distributed averaging baseline") {
  ExperimentConfig c = small_consensus();
  c.kappa = {0.0};
  c.tau = {kTauInfinite};
  c.trials = 1;
  SweepResult r = run_sweep(c);
  REQUIRE(r.summary.size() == 1);
  REQUIRE(r.baseline.size() == 1);
  const auto& a = r.summary[0];
  const auto& b = r.baseline[0];
  CHECK(a.volume_mean == b.volume_mean);
  CHECK(a.rounds_mean == b.rounds_mean);
  CHECK(a.iterations_mean == b.iterations_mean);
  CHECK(a.consensus_error_mean == b.consensus_error_mean);
}

TEST_CASE("sweep: output does not depend on the thread count") {
  ExperimentConfig c = small_consensus();
  c.kappa = {0.3, 0.6};
  c.trials = 3;
  c.jobs = 1;
  const std::string one = summary_text(run_sweep(c));
  c.jobs = 4;
  CHECK(summary_text(run_sweep(c)) == one);

  const fs::path dir = fs::temp_directory_path() / "adcons_harness_test";
  fs::remove_all(dir);
  c.out = (dir / "a").string();
  c.traces = true;
  write_sweep_outputs(c, run_sweep(c));
  c.out = (dir / "b").string();
  c.jobs = 1;
  write_sweep_outputs(c, run_sweep(c));
  for (const char* f : {"summary.csv", "runs.csv", "baseline.csv"}) {
    CHECK(fs::exists(dir / "a" / f));
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  }
  CHECK(slurp(dir / "a" / "summary.csv").rfind(kSummaryHeader, 0) == 0);
  std::size_t traces = 0;
  for (const auto& e : fs::directory_iterator(dir / "a" / "traces")) {
    ++traces;
    CHECK(slurp(e.path()).rfind(kTraceHeader, 0) == 0);
  }
  CHECK(traces == 9);  // 6 runs plus 3 baseline runs
  fs::remove_all(dir);
}

TEST_CASE("sweep: failed runs are recorded, not fatal") {
  ExperimentConfig c = small_consensus();
  c.scenario = Scenario::Linreg;
  c.algorithm = Algorithm::ACGT;
  c.n = {8};
  c.samples = 200;
  c.alpha = {10.0};  // far beyond 2/L
  c.tolerance = 1e-8;
  c.max_iters = 500;
  c.baseline = false;
  SweepResult r = run_sweep(c);
  REQUIRE(r.summary.size() == 1);
  CHECK(r.summary[0].status == "failed");
  for (const auto& run : r.runs) CHECK(run.status == "diverged");
}

TEST_CASE("budget scenario") {
  ExperimentConfig c = small_consensus();
  c.scenario = Scenario::Budget;
  c.n = {16};
  c.p = {0.8};
  c.kappa = {0.5};
  c.trials = 3;
  c.bits = 1e5;
  c.bits_per_vector = 64;
  SweepResult r = run_sweep(c);
  CHECK(r.budget.size() == 3);
  for (const auto& b : r.budget) CHECK(b.T_prune >= b.T);
  std::ostringstream s;
  write_budget_csv(s, r.budget);
  CHECK(s.str().rfind(kBudgetHeader, 0) == 0);
}

TEST_CASE("grid search") {
  auto constant = [](double err) {
    return [err](double) {
      RunTrace t;
      t.rows.push_back(TraceRow{0, 0, 0, 0.0, err, std::nullopt, ""});
      return t;
    };
  };
  GridSearchResult single = step_size_grid_search({0.3}, constant(1e-3));
  CHECK(single.best_alpha == 0.3);
  GridSearchResult tie = step_size_grid_search({0.1, 0.2, 0.05}, constant(1e-3));
  CHECK(tie.best_alpha == 0.2);
  CHECK_THROWS(step_size_grid_search({}, constant(1.0)));

  // f_i = 5 ||x - c_i||^2 has L = 10, so alpha = 1 diverges
  Matrix centers = gaussian_states(4, 2, 1);
  QuadraticObjective f(centers, Vector::Constant(4, 10.0));
  RunConfig base;
  base.algorithm = Algorithm::GTA;
  base.graph = Graph::complete(4);
  base.max_iters = 200;
  GridSearchResult div = step_size_grid_search(base, f, Matrix::Zero(4, 2), {1.0});
  CHECK(div.all_diverged());
  CHECK(div.entries.at(0).diverged);
}

TEST_CASE("grid search on synthetic linear regression") {
  SyntheticLinear s = gen_linear_synthetic(3200, 10, 0.1, 1);
  RegressionObjective f(make_objective_spec(ProblemKind::Linear, s.data, 32, 0.0, 2), s.data);
  RunConfig base;
  base.algorithm = Algorithm::ACGT;
  base.graph = connected_erdos_renyi(32, 0.5, 3);
  base.prune = PruneParams::uniform(0.5, 0.5, Beta(1));
  base.max_iters = 300;
  const std::vector<double> alphas{1e-4, 1e-3, 1e-2, 1e-1, 1.0};
  GridSearchResult r = step_size_grid_search(base, f, Matrix::Zero(32, 10), alphas);
  REQUIRE(r.best_alpha.has_value());
  CHECK(*r.best_alpha > 1e-4);
  double best = 0;
  for (const auto& e : r.entries)
    if (e.alpha == *r.best_alpha) best = e.final_error;
  for (const auto& e : r.entries)
    if (!e.diverged) CHECK(best <= e.final_error);
}

TEST_CASE("connected_erdos_renyi and gaussian_states") {
  for (std::uint64_t s = 0; s < 10; ++s) CHECK(is_connected(connected_erdos_renyi(20, 0.15, s)));
  CHECK(connected_erdos_renyi(20, 0.15, 4) == connected_erdos_renyi(20, 0.15, 4));
  CHECK_THROWS(connected_erdos_renyi(10, 0.0, 1));
  CHECK(gaussian_states(5, 3, 9) == gaussian_states(5, 3, 9));
  CHECK(gaussian_states(5, 3, 9).rows() == 5);
}

#ifdef ADCONS_CLI_PATH
TEST_CASE("cli: flags override the config file, bad configs exit 1") {
  const fs::path dir = fs::temp_directory_path() / "adcons_cli_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ofstream(dir / "cfg.json") << R"({"n": 10, "p": 0.6, "kappa": 0.3, "trials": 1, "dim": 2, "max_iters": 500, "seed": 4})";
  const std::string cli = ADCONS_CLI_PATH;
  const std::string out = (dir / "out").string();
  const std::string cmd = cli + " sweep --config " + (dir / "cfg.json").string() + " --kappa 0.6 --out " + out + " > /dev/null";
  REQUIRE(std::system(cmd.c_str()) == 0);
  auto cfg = nlohmann::json::parse(slurp(fs::path(out) / "config.json"));
  CHECK(cfg["kappa"] == nlohmann::json::array({0.6}));
  CHECK(cfg["n"] == nlohmann::json::array({10}));
  CHECK(cfg["seed"] == 4);

  const std::string bad = cli + " consensus --kappa 2 --out " + out + " > /dev/null 2>&1";
  const int status = std::system(bad.c_str());
  CHECK(WEXITSTATUS(status) == 1);
  fs::remove_all(dir);
}
#endif
