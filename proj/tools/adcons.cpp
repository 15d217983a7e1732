// adcons command-line driver.
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "adcons/analysis.hpp"
#include "adcons/harness.hpp"
#include "adcons/rng.hpp"

using namespace adcons;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitRun = 2;

struct Shared {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> jobs;
  bool traces = false;
};

/// Grid and run flags common to several subcommands. Unset flags leave the
/// config file's value alone.
struct Flags {
  std::vector<std::size_t> n;
  std::vector<double> p, kappa, alpha;
  std::vector<std::string> tau, beta;
  std::optional<double> kappa_lower, tol, lambda;
  std::optional<std::size_t> max_iters, trials, dim, samples, refresh_period;
  std::optional<std::string> algorithm, data, label_col;
  bool no_overhead = false, shared_prune = false, tune = false;
};

void add_shared(CLI::App* app, Shared& s) {
  app->add_option("--config", s.config, "JSON experiment config");
  app->add_option("--seed", s.seed, "Master seed");
  app->add_option("--out", s.out, "Output directory");
  app->add_option("--jobs", s.jobs, "Worker threads")->check(CLI::PositiveNumber);
  app->add_flag("--traces", s.traces, "Write one trace CSV per run");
}

void add_grid(CLI::App* app, Flags& f) {
  app->add_option("--n", f.n, "Node counts");
  app->add_option("--p", f.p, "Edge probabilities");
  app->add_option("--kappa", f.kappa, "Pruning fractions");
  app->add_option("--kappa-lower", f.kappa_lower, "Retention floor fraction (default 1 - kappa)");
  app->add_option("--tau", f.tau, "Cycle lengths (integer or inf)");
  app->add_option("--beta", f.beta, "Softmax parameters (number or greedy)");
  app->add_option("--tol", f.tol, "Stopping tolerance (<= 0 runs to the cap)");
  app->add_option("--max-iters", f.max_iters, "Iteration cap");
  app->add_option("--trials", f.trials, "Trials per grid point");
  app->add_option("--dim", f.dim, "Estimate dimension");
  app->add_option("--refresh-period", f.refresh_period, "Use the reference graph every R cycles");
  app->add_flag("--no-overhead", f.no_overhead, "Do not bill the pruning exchange");
}

std::size_t parse_tau(const std::string& s) {
  if (s == "inf") return kTauInfinite;
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used == s.size() && v >= 1) return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
  }
  throw ConfigError("--tau: expected a positive integer or inf, got '" + s + "'");
}

Beta parse_beta(const std::string& s) {
  if (s == "greedy" || s == "inf") return Beta::greedy();
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size() && v >= 0.0) return Beta(v);
  } catch (const std::exception&) {
  }
  throw ConfigError("--beta: expected a nonnegative number or greedy, got '" + s + "'");
}

ExperimentConfig base_config(const Shared& s) {
  ExperimentConfig c = s.config.empty() ? ExperimentConfig{} : load_config(s.config);
  if (s.seed) c.seed = *s.seed;
  if (s.out) c.out = *s.out;
  if (s.jobs) c.jobs = *s.jobs;
  if (s.traces) c.traces = true;
  return c;
}

void apply(const Flags& f, ExperimentConfig& c) {
  if (!f.n.empty()) c.n = f.n;
  if (!f.p.empty()) c.p = f.p;
  if (!f.kappa.empty()) c.kappa = f.kappa;
  if (!f.alpha.empty()) c.alpha = f.alpha;
  if (!f.tau.empty()) {
    c.tau.clear();
    for (const auto& t : f.tau) c.tau.push_back(parse_tau(t));
  }
  if (!f.beta.empty()) {
    c.beta.clear();
    for (const auto& b : f.beta) c.beta.push_back(parse_beta(b));
  }
  if (f.kappa_lower) c.kappa_lower = f.kappa_lower;
  if (f.tol) c.tolerance = *f.tol;
  if (f.lambda) c.lambda = *f.lambda;
  if (f.max_iters) c.max_iters = *f.max_iters;
  if (f.trials) c.trials = *f.trials;
  if (f.dim) c.dim = *f.dim;
  if (f.samples) c.samples = *f.samples;
  if (f.refresh_period) c.refresh_period = f.refresh_period;
  if (f.algorithm) {
    try {
      c.algorithm = algorithm_from_string(*f.algorithm);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (f.data) c.data = *f.data;
  if (f.label_col) c.label_col = *f.label_col;
  if (f.no_overhead) c.count_pruning_overhead = false;
  if (f.shared_prune) c.shared_prune = true;
  if (f.tune) c.tune_alpha = true;
}

void print_summary(const SweepResult& r) {
  write_summary_csv(std::cout, r.summary);
  if (!r.baseline.empty()) {
    std::cout << "# baseline\n";
    write_summary_csv(std::cout, r.baseline);
  }
}

int run_and_write(ExperimentConfig& c) {
  c.validate();
  const SweepResult r = run_sweep(c);
  write_sweep_outputs(c, r);
  print_summary(r);
  for (const auto& s : r.summary)
    if (s.status == "failed") return kExitRun;
  return 0;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text << '\n';
}

struct AnalyzeFlags {
  std::string check;
  std::size_t n = 16;
  double p = 0.5;
  double kappa = 0.5;
  std::size_t tau = 5;
  std::size_t max_iters = 400;
  std::size_t refresh_period = 1;
  std::optional<std::size_t> tau_hat;
  double L = 1.0;
  std::size_t dim = 10;
};

int analyze(const Shared& s, const AnalyzeFlags& a) {
  const std::uint64_t seed = s.seed.value_or(0);
  const std::filesystem::path dir(s.out.value_or("out"));
  std::filesystem::create_directories(dir);

  RunConfig rc;
  rc.algorithm = Algorithm::AC;
  rc.graph = connected_erdos_renyi(a.n, a.p, derive_seed(seed, 1));
  rc.prune = PruneParams::uniform(a.kappa, 1.0 - a.kappa, Beta(1.0));
  rc.tau = a.tau;
  rc.max_iters = a.max_iters;
  rc.seed = seed;
  if (a.refresh_period > 0) rc.refresh_period = a.refresh_period;
  rc.refresh_policy = RefreshPolicy::WhenDisconnected;
  rc.record_cycles = true;
  const Matrix x0 = gaussian_states(a.n, a.dim, derive_seed(seed, 2));
  const RunTrace trace = ac_run(rc, x0);

  // R certifies the window; without refresh (R = 0) it is measured on the run.
  std::size_t tau_bar = a.refresh_period;
  if (tau_bar == 0) {
    std::vector<Graph> graphs;
    for (const auto& c : trace.cycles) graphs.push_back(c.graph);
    tau_bar = measure_connectivity_window(graphs).value_or(std::max<std::size_t>(graphs.size(), 1));
    std::cerr << "measured connectivity window: " << tau_bar << " cycles\n";
  }

  if (a.check == "envelope") {
    const EnvelopeParams params = EnvelopeParams::for_graph(rc.graph, tau_bar);
    const EnvelopeReport rep = theorem1_envelope(trace, params);
    std::ofstream csv(dir / "envelope.csv", std::ios::binary);
    write_envelope_csv(csv, rep);
    const std::string js = envelope_summary_json(rep, params);
    write_text(dir / "envelope.json", js);
    std::cout << js << '\n';
    return rep.ok() ? 0 : kExitRun;
  }
  const auto seq = trace.iteration_matrices();
  if (a.check == "rho-prime") {
    const std::size_t th = a.tau_hat.value_or(1);
    const double rho = compute_rho_prime(seq, seq.size(), th);
    char buf[160];
    std::snprintf(buf, sizeof buf, "{\n  \"tau_hat\": %zu,\n  \"iterations\": %zu,\n  \"rho_prime\": %.17g\n}", th, seq.size(), rho);
    write_text(dir / "rho_prime.json", buf);
    std::cout << buf << '\n';
    return 0;
  }
  if (a.check == "step-size") {
    const EnvelopeParams params = EnvelopeParams::for_graph(rc.graph, tau_bar);
    const StepSizeReport rep = suggest_step_size(params, a.n, a.L, seq);
    const std::string js = step_size_json(rep);
    write_text(dir / "step_size.json", js);
    std::cout << js << '\n';
    return 0;
  }
  throw ConfigError("--check must be envelope, rho-prime or step-size");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive network pruning for decentralized consensus and optimization"};
  app.require_subcommand(1);

  Shared shared;
  Flags flags;
  AnalyzeFlags af;
  std::string problem = "linreg";
  double bits = 0.0, bits_per_vector = 0.0;

  auto* consensus = app.add_subcommand("consensus", "Adaptive consensus runs against distributed averaging");
  add_shared(consensus, shared);
  add_grid(consensus, flags);
  consensus->add_option("--algorithm", flags.algorithm, "ac, dist-avg or gossip");

  auto* optimize = app.add_subcommand("optimize", "AC-GT / gradient tracking on regression problems");
  add_shared(optimize, shared);
  add_grid(optimize, flags);
  optimize->add_option("--problem", problem, "linreg or logreg")->check(CLI::IsMember({"linreg", "logreg"}));
  optimize->add_option("--data", flags.data, "Numeric CSV dataset");
  optimize->add_option("--label-col", flags.label_col, "Label column name");
  optimize->add_option("--alpha", flags.alpha, "Step sizes");
  optimize->add_option("--lambda", flags.lambda, "Regularization");
  optimize->add_option("--samples", flags.samples, "Synthetic sample count");
  optimize->add_option("--algorithm", flags.algorithm, "acgt or gta");
  optimize->add_flag("--tune", flags.tune, "Grid-search alpha per grid point");
  optimize->add_flag("--shared-prune", flags.shared_prune, "Reuse the x-pruned graph for y");

  auto* sweep = app.add_subcommand("sweep", "Run a configured sweep");
  add_shared(sweep, shared);
  add_grid(sweep, flags);
  sweep->add_option("--alpha", flags.alpha, "Step sizes");

  auto* analyze_cmd = app.add_subcommand("analyze", "Check the theory bounds on a run");
  add_shared(analyze_cmd, shared);
  analyze_cmd->add_option("--check", af.check, "envelope, rho-prime or step-size")
      ->required()
      ->check(CLI::IsMember({"envelope", "rho-prime", "step-size"}));
  analyze_cmd->add_option("--n", af.n, "Nodes");
  analyze_cmd->add_option("--p", af.p, "Edge probability");
  analyze_cmd->add_option("--kappa", af.kappa, "Pruning fraction");
  analyze_cmd->add_option("--tau", af.tau, "Cycle length");
  analyze_cmd->add_option("--max-iters", af.max_iters, "Iterations");
  analyze_cmd->add_option("--refresh-period", af.refresh_period, "Connectivity window R (0: no refresh, window measured)");
  analyze_cmd->add_option("--tau-hat", af.tau_hat, "Window for rho-prime");
  analyze_cmd->add_option("--L", af.L, "Smoothness constant for step-size");
  analyze_cmd->add_option("--dim", af.dim, "Estimate dimension");

  auto* budget = app.add_subcommand("budget", "Fixed-budget comparison of pruned vs unpruned averaging");
  add_shared(budget, shared);
  add_grid(budget, flags);
  budget->add_option("--bits", bits, "Total bit budget B");
  budget->add_option("--bits-per-vector", bits_per_vector, "Bits per transmitted vector D");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*analyze_cmd) return analyze(shared, af);

    ExperimentConfig c = base_config(shared);
    if (*consensus) {
      c.scenario = Scenario::Consensus;
      if (shared.config.empty() && !flags.algorithm) c.algorithm = Algorithm::AC;
    } else if (*optimize) {
      c.scenario = problem == "logreg" ? Scenario::Logreg : Scenario::Linreg;
      if (!flags.algorithm && (c.algorithm == Algorithm::AC || c.algorithm == Algorithm::DistAvg ||
                               c.algorithm == Algorithm::RandomGossip))
        c.algorithm = Algorithm::ACGT;
      if (c.scenario == Scenario::Logreg && !flags.lambda && c.lambda == 0.0) c.lambda = 1e-4;
    } else if (*budget) {
      c.scenario = Scenario::Budget;
      if (bits > 0.0) c.bits = bits;
      if (bits_per_vector > 0.0) c.bits_per_vector = bits_per_vector;
    } else if (*sweep) {
      if (shared.config.empty()) throw ConfigError("sweep needs --config");
    }
    apply(flags, c);
    return run_and_write(c);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "run failed: " << e.what() << '\n';
    return kExitRun;
  }
}
