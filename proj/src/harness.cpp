#include "adcons/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include "adcons/analysis.hpp"
#include "adcons/rng.hpp"
#include "json.hpp"

namespace adcons {

namespace {

using nlohmann::json;

// Seed labels for the per-trial substreams.
enum : std::uint64_t { kGraphLabel = 1, kStatesLabel = 2, kDataLabel = 3, kPartitionLabel = 4, kRunLabel = 5 };

constexpr double kDivergence = 1e10;

template <class T>
std::vector<T> as_list(const json& v, const char* key) {
  try {
    if (v.is_array()) return v.get<std::vector<T>>();
    return {v.get<T>()};
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

std::size_t tau_from_json(const json& v) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "infinity") return kTauInfinite;
    throw ConfigError("tau: expected a positive integer or \"inf\", got '" + s + "'");
  }
  if (!v.is_number_integer() || v.get<long long>() < 1) throw ConfigError("tau: expected a positive integer or \"inf\"");
  return v.get<std::size_t>();
}

Beta beta_from_json(const json& v) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "greedy" || s == "inf") return Beta::greedy();
    throw ConfigError("beta: expected a number or \"greedy\", got '" + s + "'");
  }
  if (!v.is_number()) throw ConfigError("beta: expected a number or \"greedy\"");
  return Beta(v.get<double>());
}

template <class F>
void parallel_for(std::size_t count, std::size_t jobs, F&& fn) {
  jobs = std::max<std::size_t>(1, std::min(jobs, count));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < jobs; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  for (auto& t : pool) t.join();
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? std::nan("") : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double median_of(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::uint64_t real_bits(double x) {
  std::uint64_t b;
  std::memcpy(&b, &x, sizeof b);
  return b;
}

bool is_optimization(Scenario s) { return s == Scenario::Linreg || s == Scenario::Logreg; }

/// Everything a trial shares across grid points.
struct TrialContext {
  Graph graph;
  Matrix x0;
  std::shared_ptr<const RegressionObjective> objective;
};

std::string status_of(const RunTrace& t) {
  if (t.diverged) return "diverged";
  return t.converged ? "converged" : "max_iters";
}

RunRecord record_from(const RunTrace& t) {
  RunRecord r;
  r.volume = t.ledger.volume;
  r.rounds = t.ledger.rounds;
  r.iterations = t.iterations();
  r.consensus_error = t.rows.back().consensus_error;
  r.optimality_error = t.rows.back().optimality_error;
  if (!t.cycle_gaps.empty()) r.spectral_gap = t.mean_cycle_gap();
  r.status = status_of(t);
  return r;
}

SummaryRow summarize(Scenario scenario, const std::string& algorithm, const GridPoint& point,
                     const std::vector<const RunRecord*>& runs, double tolerance) {
  SummaryRow s;
  s.scenario = scenario;
  s.algorithm = algorithm;
  s.point = point;
  s.trials = runs.size();
  std::vector<double> vol, rnd, it, gap, cons, opt;
  std::size_t bad = 0;
  for (const RunRecord* r : runs) {
    if (r->status.rfind("error", 0) == 0) {
      ++bad;
      continue;
    }
    if (r->status == "diverged") ++bad;
    if (r->status == "converged") ++s.converged;
    vol.push_back(static_cast<double>(r->volume));
    rnd.push_back(static_cast<double>(r->rounds));
    it.push_back(static_cast<double>(r->iterations));
    cons.push_back(r->consensus_error);
    if (r->spectral_gap) gap.push_back(*r->spectral_gap);
    if (r->optimality_error) opt.push_back(*r->optimality_error);
  }
  s.volume_mean = mean_of(vol);
  s.volume_median = median_of(vol);
  s.rounds_mean = mean_of(rnd);
  s.rounds_median = median_of(rnd);
  s.iterations_mean = mean_of(it);
  s.consensus_error_mean = mean_of(cons);
  if (!gap.empty()) s.spectral_gap_mean = mean_of(gap);
  if (!opt.empty()) s.optimality_error_mean = mean_of(opt);
  if (bad == runs.size()) s.status = "failed";
  else if (bad > 0 || (tolerance > 0.0 && s.converged < runs.size())) s.status = "partial";
  else s.status = "ok";
  return s;
}

RunConfig base_run_config(const ExperimentConfig& cfg, const GridPoint& pt, const Graph& g, std::uint64_t seed) {
  RunConfig rc;
  rc.algorithm = cfg.algorithm;
  rc.graph = g;
  rc.prune = PruneParams::uniform(pt.kappa, cfg.kappa_lower.value_or(1.0 - pt.kappa), pt.beta);
  rc.tau = pt.tau;
  rc.alpha = pt.alpha;
  rc.shared_prune = cfg.shared_prune;
  rc.refresh_period = cfg.refresh_period;
  rc.refresh_policy = cfg.refresh_policy;
  rc.max_iters = cfg.max_iters;
  rc.seed = seed;
  rc.tolerance = cfg.tolerance;
  rc.count_pruning_overhead = cfg.count_pruning_overhead;
  rc.track_spectral_gap = cfg.algorithm == Algorithm::AC || cfg.algorithm == Algorithm::ACGT;
  return rc;
}

void write_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  body(out);
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

}  // namespace

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::Consensus: return "consensus";
    case Scenario::Linreg: return "linreg";
    case Scenario::Logreg: return "logreg";
    case Scenario::Budget: return "budget";
  }
  return "?";
}

Scenario scenario_from_string(const std::string& s) {
  if (s == "consensus" || s == "CONSENSUS") return Scenario::Consensus;
  if (s == "linreg" || s == "LINREG") return Scenario::Linreg;
  if (s == "logreg" || s == "LOGREG") return Scenario::Logreg;
  if (s == "budget" || s == "BUDGET") return Scenario::Budget;
  throw ConfigError("unknown scenario '" + s + "'");
}

void ExperimentConfig::validate() const {
  auto need = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  need(!n.empty() && !p.empty() && !kappa.empty() && !tau.empty() && !beta.empty() && !alpha.empty(),
       "every grid must be nonempty");
  need(trials >= 1, "trials must be >= 1");
  need(jobs >= 1, "jobs must be >= 1");
  need(dim >= 1, "dim must be >= 1");
  for (auto v : n) need(v >= 1, "n must be >= 1");
  for (auto v : p) need(v >= 0.0 && v <= 1.0, "p must lie in [0, 1]");
  for (auto v : kappa) {
    need(v >= 0.0 && v <= 1.0, "kappa must lie in [0, 1]");
    if (kappa_lower) need(*kappa_lower <= 1.0 - v + 1e-9, "kappa_lower must not exceed 1 - kappa");
  }
  if (kappa_lower) need(*kappa_lower >= 0.0 && *kappa_lower <= 1.0, "kappa_lower must lie in [0, 1]");
  for (auto v : tau) need(v >= 1, "tau must be >= 1");
  for (const auto& b : beta) need(b.is_greedy() || b.value() >= 0.0, "beta must be >= 0");
  if (refresh_period) need(*refresh_period >= 1, "refresh_period must be >= 1");

  const bool consensus_alg = algorithm == Algorithm::AC || algorithm == Algorithm::DistAvg ||
                             algorithm == Algorithm::RandomGossip;
  switch (scenario) {
    case Scenario::Consensus:
      need(consensus_alg, "consensus scenario needs algorithm ac, dist-avg or gossip");
      break;
    case Scenario::Linreg:
    case Scenario::Logreg:
      need(!consensus_alg, "optimization scenarios need algorithm acgt or gta");
      for (auto a : alpha) need(a > 0.0, "alpha must be > 0");
      need(lambda >= 0.0, "lambda must be >= 0");
      if (scenario == Scenario::Logreg) {
        need(!data.empty(), "logreg needs a data CSV");
        need(lambda > 0.0, "logreg needs lambda > 0");
      } else if (data.empty()) {
        need(samples >= dim, "samples must be >= dim");
        for (auto v : n) need(samples >= v, "samples must be >= n");
      }
      break;
    case Scenario::Budget:
      need(bits > 0.0 && bits_per_vector > 0.0, "bits and bits_per_vector must be > 0");
      for (auto v : kappa) need(v < 1.0, "budget needs kappa < 1");
      break;
  }
}

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");

  ExperimentConfig c;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "scenario") c.scenario = scenario_from_string(v.get<std::string>());
      else if (key == "algorithm") {
        try {
          c.algorithm = algorithm_from_string(v.get<std::string>());
        } catch (const std::invalid_argument& e) {
          throw ConfigError(e.what());
        }
      } else if (key == "n") c.n = as_list<std::size_t>(v, "n");
      else if (key == "p") c.p = as_list<double>(v, "p");
      else if (key == "kappa") c.kappa = as_list<double>(v, "kappa");
      else if (key == "kappa_lower") c.kappa_lower = v.is_null() ? std::nullopt : std::optional<double>(v.get<double>());
      else if (key == "tau") {
        c.tau.clear();
        if (v.is_array()) for (const auto& e : v) c.tau.push_back(tau_from_json(e));
        else c.tau.push_back(tau_from_json(v));
      } else if (key == "beta") {
        c.beta.clear();
        if (v.is_array()) for (const auto& e : v) c.beta.push_back(beta_from_json(e));
        else c.beta.push_back(beta_from_json(v));
      } else if (key == "alpha") c.alpha = as_list<double>(v, "alpha");
      else if (key == "trials") c.trials = v.get<std::size_t>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "tolerance") c.tolerance = v.get<double>();
      else if (key == "max_iters") c.max_iters = v.get<std::size_t>();
      else if (key == "dim") c.dim = v.get<std::size_t>();
      else if (key == "count_pruning_overhead") c.count_pruning_overhead = v.get<bool>();
      else if (key == "shared_prune") c.shared_prune = v.get<bool>();
      else if (key == "refresh_period") c.refresh_period = v.is_null() ? std::nullopt : std::optional<std::size_t>(v.get<std::size_t>());
      else if (key == "refresh_policy") {
        const auto s = v.get<std::string>();
        if (s == "periodic") c.refresh_policy = RefreshPolicy::Periodic;
        else if (s == "when-disconnected") c.refresh_policy = RefreshPolicy::WhenDisconnected;
        else throw ConfigError("refresh_policy: expected periodic or when-disconnected");
      } else if (key == "baseline") c.baseline = v.get<bool>();
      else if (key == "samples") c.samples = v.get<std::size_t>();
      else if (key == "noise") c.noise = v.get<double>();
      else if (key == "lambda") c.lambda = v.get<double>();
      else if (key == "data") c.data = v.get<std::string>();
      else if (key == "label_col") c.label_col = v.get<std::string>();
      else if (key == "normalize") c.normalize = v.get<bool>();
      else if (key == "tune_alpha") c.tune_alpha = v.get<bool>();
      else if (key == "tune_iters") c.tune_iters = v.get<std::size_t>();
      else if (key == "bits") c.bits = v.get<double>();
      else if (key == "bits_per_vector") c.bits_per_vector = v.get<double>();
      else if (key == "out") c.out = v.get<std::string>();
      else if (key == "jobs") c.jobs = v.get<std::size_t>();
      else if (key == "traces") c.traces = v.get<bool>();
      else throw ConfigError("unknown config key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config type error: ") + e.what());
  }
  // Sensible per-scenario defaults when the file leaves the algorithm out.
  if (!j.contains("algorithm") && is_optimization(c.scenario)) c.algorithm = Algorithm::ACGT;
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string config_to_json(const ExperimentConfig& c) {
  json j;
  j["scenario"] = to_string(c.scenario);
  j["algorithm"] = to_string(c.algorithm);
  j["n"] = c.n;
  j["p"] = c.p;
  j["kappa"] = c.kappa;
  j["kappa_lower"] = c.kappa_lower ? json(*c.kappa_lower) : json(nullptr);
  j["tau"] = json::array();
  for (auto t : c.tau) j["tau"].push_back(t == kTauInfinite ? json("inf") : json(t));
  j["beta"] = json::array();
  for (const auto& b : c.beta) j["beta"].push_back(b.is_greedy() ? json("greedy") : json(b.value()));
  j["alpha"] = c.alpha;
  j["trials"] = c.trials;
  j["seed"] = c.seed;
  j["tolerance"] = c.tolerance;
  j["max_iters"] = c.max_iters;
  j["dim"] = c.dim;
  j["count_pruning_overhead"] = c.count_pruning_overhead;
  j["shared_prune"] = c.shared_prune;
  j["refresh_period"] = c.refresh_period ? json(*c.refresh_period) : json(nullptr);
  j["refresh_policy"] = c.refresh_policy == RefreshPolicy::Periodic ? "periodic" : "when-disconnected";
  j["baseline"] = c.baseline;
  j["samples"] = c.samples;
  j["noise"] = c.noise;
  j["lambda"] = c.lambda;
  j["data"] = c.data;
  j["label_col"] = c.label_col;
  j["normalize"] = c.normalize;
  j["tune_alpha"] = c.tune_alpha;
  j["tune_iters"] = c.tune_iters;
  j["bits"] = c.bits;
  j["bits_per_vector"] = c.bits_per_vector;
  j["out"] = c.out;
  j["jobs"] = c.jobs;
  j["traces"] = c.traces;
  return j.dump(2);
}

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_real(const std::optional<double>& v) { return v ? format_real(*v) : std::string(); }

std::string format_tau(std::size_t tau) { return tau == kTauInfinite ? "inf" : std::to_string(tau); }

std::string format_beta(const Beta& b) { return b.is_greedy() ? "greedy" : format_real(b.value()); }

void write_trace_csv(std::ostream& out, const RunTrace& trace) {
  out << kTraceHeader << '\n';
  for (const auto& r : trace.rows) {
    out << r.k << ',' << r.comm_volume << ',' << r.comm_rounds << ',' << format_real(r.consensus_error) << ','
        << format_real(r.optimality_error) << ',' << format_real(r.spectral_gap) << ',' << r.status << '\n';
  }
}

std::vector<GridPoint> expand_grid(const ExperimentConfig& cfg) {
  const bool opt = is_optimization(cfg.scenario);
  const std::vector<double> alphas = opt && !cfg.tune_alpha ? cfg.alpha : std::vector<double>{0.0};
  const std::vector<std::size_t> taus = cfg.scenario == Scenario::Budget ? std::vector<std::size_t>{kTauInfinite} : cfg.tau;
  std::vector<GridPoint> grid;
  for (auto n : cfg.n)
    for (auto p : cfg.p)
      for (auto k : cfg.kappa)
        for (auto t : taus)
          for (const auto& b : cfg.beta)
            for (auto a : alphas) grid.push_back(GridPoint{n, p, k, t, b, a});
  return grid;
}

Matrix gaussian_states(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = normal(rng);
  return x;
}

Graph connected_erdos_renyi(std::size_t n, double p, std::uint64_t seed) {
  for (std::uint64_t attempt = 0; attempt < 1000; ++attempt) {
    Graph g = erdos_renyi(n, p, attempt == 0 ? seed : derive_seed(seed, kGraphLabel, attempt));
    if (is_connected(g)) return g;
  }
  throw std::runtime_error("no connected G(" + std::to_string(n) + ", " + format_real(p) + ") in 1000 draws");
}

GridSearchResult step_size_grid_search(const std::vector<double>& alphas,
                                       const std::function<RunTrace(double)>& run) {
  if (alphas.empty()) throw std::invalid_argument("step_size_grid_search: empty alpha grid");
  GridSearchResult res;
  for (double a : alphas) {
    GridSearchEntry e;
    e.alpha = a;
    try {
      const RunTrace t = run(a);
      e.final_error = t.rows.back().optimality_error.value_or(std::nan(""));
      e.diverged = t.diverged || !std::isfinite(e.final_error) || std::abs(e.final_error) > kDivergence;
    } catch (const std::exception&) {
      e.final_error = std::nan("");
      e.diverged = true;
    }
    res.entries.push_back(e);
    if (e.diverged) continue;
    const auto best = std::find_if(res.entries.begin(), res.entries.end(),
                                   [&](const GridSearchEntry& x) { return res.best_alpha && x.alpha == *res.best_alpha; });
    if (!res.best_alpha || e.final_error < best->final_error ||
        (e.final_error == best->final_error && e.alpha > best->alpha))
      res.best_alpha = e.alpha;
  }
  return res;
}

GridSearchResult step_size_grid_search(const RunConfig& base, const Objective& objective, const Matrix& x0,
                                       const std::vector<double>& alphas) {
  return step_size_grid_search(alphas, [&](double a) {
    RunConfig rc = base;
    rc.alpha = a;
    rc.tolerance = 0.0;
    return run(rc, &objective, x0);
  });
}

SweepResult run_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  SweepResult res;
  res.grid = expand_grid(cfg);
  const std::size_t T = cfg.trials;

  // Per-(n, p, trial) contexts, shared by all grid points.
  std::map<std::tuple<std::size_t, std::uint64_t, std::size_t>, TrialContext> contexts;
  std::optional<Dataset> file_data;
  if (!cfg.data.empty() && is_optimization(cfg.scenario))
    file_data = load_csv_dataset(cfg.data, cfg.label_col, cfg.normalize, cfg.scenario == Scenario::Logreg);
  std::map<std::pair<std::size_t, std::size_t>, std::shared_ptr<const RegressionObjective>> objectives;

  std::vector<std::tuple<std::size_t, double, std::size_t>> keys;
  for (auto n : cfg.n)
    for (auto p : cfg.p)
      for (std::size_t t = 0; t < T; ++t) keys.emplace_back(n, p, t);
  for (const auto& [n, p, t] : keys) {
    TrialContext ctx;
    const std::uint64_t trial_key = hash_key({n, real_bits(p), t});
    ctx.graph = connected_erdos_renyi(n, p, derive_seed(cfg.seed, kGraphLabel, trial_key));
    if (is_optimization(cfg.scenario)) {
      auto& obj = objectives[{n, t}];
      if (!obj) {
        const ProblemKind kind = cfg.scenario == Scenario::Logreg ? ProblemKind::Logistic : ProblemKind::Linear;
        Dataset data = file_data ? *file_data
                                 : gen_linear_synthetic(cfg.samples, cfg.dim, cfg.noise, derive_seed(cfg.seed, kDataLabel, t)).data;
        ObjectiveSpec spec = make_objective_spec(kind, data, n, cfg.lambda, derive_seed(cfg.seed, kPartitionLabel, hash_key({n, t})));
        obj = std::make_shared<const RegressionObjective>(std::move(spec), std::move(data));
      }
      ctx.objective = obj;
      ctx.x0 = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(obj->dim()));
    } else {
      ctx.x0 = gaussian_states(n, cfg.dim, derive_seed(cfg.seed, kStatesLabel, trial_key));
    }
    contexts.emplace(std::make_tuple(n, real_bits(p), t), std::move(ctx));
  }
  auto context = [&](std::size_t n, double p, std::size_t t) -> const TrialContext& {
    return contexts.at(std::make_tuple(n, real_bits(p), t));
  };
  auto run_seed = [&](std::size_t t) { return derive_seed(cfg.seed, kRunLabel, t); };

  // Step-size tuning on trial 0, one search per grid point.
  std::vector<GridPoint>& grid = res.grid;
  if (is_optimization(cfg.scenario) && cfg.tune_alpha) {
    parallel_for(grid.size(), cfg.jobs, [&](std::size_t gi) {
      const TrialContext& ctx = context(grid[gi].n, grid[gi].p, 0);
      RunConfig rc = base_run_config(cfg, grid[gi], ctx.graph, run_seed(0));
      rc.max_iters = cfg.tune_iters;
      rc.track_spectral_gap = false;
      const auto found = step_size_grid_search(rc, *ctx.objective, ctx.x0, cfg.alpha);
      grid[gi].alpha = found.best_alpha.value_or(std::nan(""));
    });
  }

  if (cfg.scenario == Scenario::Budget) {
    res.budget.resize(grid.size() * T);
    parallel_for(res.budget.size(), cfg.jobs, [&](std::size_t idx) {
      const GridPoint& pt = grid[idx / T];
      const std::size_t t = idx % T;
      const TrialContext& ctx = context(pt.n, pt.p, t);
      BudgetOptions opts;
      opts.beta = pt.beta;
      opts.kappa_lower = cfg.kappa_lower;
      opts.seed = run_seed(t);
      const BudgetReport r = budget_comparison(ctx.graph, pt.kappa, cfg.bits, cfg.bits_per_vector, ctx.x0, opts);
      res.budget[idx] = BudgetRow{pt, t, budget_json(r), r.error_reference, r.error_pruned, r.gap_reference,
                                  r.gap_pruned, r.T, r.T_prune, r.pruned_connected};
    });
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
      SummaryRow pruned, ref;
      pruned.scenario = ref.scenario = Scenario::Budget;
      pruned.algorithm = "dist-avg-pruned";
      ref.algorithm = "dist-avg";
      pruned.point = ref.point = grid[gi];
      pruned.trials = ref.trials = T;
      std::vector<double> ep, er, gp, gr, tp, tr;
      std::size_t disconnected = 0;
      for (std::size_t t = 0; t < T; ++t) {
        const BudgetRow& b = res.budget[gi * T + t];
        ep.push_back(b.error_pruned);
        er.push_back(b.error_reference);
        gp.push_back(b.gap_pruned);
        gr.push_back(b.gap_reference);
        tp.push_back(static_cast<double>(b.T_prune));
        tr.push_back(static_cast<double>(b.T));
        if (!b.pruned_connected) ++disconnected;
      }
      pruned.iterations_mean = pruned.rounds_mean = mean_of(tp);
      pruned.rounds_median = median_of(tp);
      ref.iterations_mean = ref.rounds_mean = mean_of(tr);
      ref.rounds_median = median_of(tr);
      pruned.volume_mean = pruned.volume_median = ref.volume_mean = ref.volume_median = cfg.bits / cfg.bits_per_vector;
      pruned.consensus_error_mean = mean_of(ep);
      ref.consensus_error_mean = mean_of(er);
      pruned.spectral_gap_mean = mean_of(gp);
      ref.spectral_gap_mean = mean_of(gr);
      pruned.status = disconnected ? "partial" : "ok";
      ref.status = "ok";
      res.summary.push_back(pruned);
      res.baseline.push_back(ref);
    }
    return res;
  }

  // Main runs.
  res.runs.resize(grid.size() * T);
  std::vector<std::optional<RunTrace>> traces(cfg.traces ? res.runs.size() : 0);
  parallel_for(res.runs.size(), cfg.jobs, [&](std::size_t idx) {
    const std::size_t gi = idx / T, t = idx % T;
    const GridPoint& pt = grid[gi];
    RunRecord rec;
    try {
      if (!std::isfinite(pt.alpha)) throw std::runtime_error("alpha tuning: every step size diverged");
      const TrialContext& ctx = context(pt.n, pt.p, t);
      const RunConfig rc = base_run_config(cfg, pt, ctx.graph, run_seed(t));
      RunTrace trace = run(rc, ctx.objective.get(), ctx.x0);
      rec = record_from(trace);
      if (cfg.traces) traces[idx] = std::move(trace);
    } catch (const std::exception& e) {
      rec.status = std::string("error: ") + e.what();
    }
    rec.point = gi;
    rec.trial = t;
    rec.algorithm = to_string(cfg.algorithm);
    rec.alpha = pt.alpha;
    res.runs[idx] = std::move(rec);
  });
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    std::vector<const RunRecord*> rs;
    for (std::size_t t = 0; t < T; ++t) rs.push_back(&res.runs[gi * T + t]);
    res.summary.push_back(summarize(cfg.scenario, to_string(cfg.algorithm), grid[gi], rs, cfg.tolerance));
  }
  for (std::size_t idx = 0; idx < traces.size(); ++idx)
    if (traces[idx]) res.traces.emplace_back("point" + std::to_string(idx / T) + "_trial" + std::to_string(idx % T), std::move(*traces[idx]));

  // Baselines: one point per (n, p) for consensus, per (n, p, alpha) for optimization.
  if (cfg.baseline && (cfg.algorithm == Algorithm::AC || cfg.algorithm == Algorithm::ACGT)) {
    const bool opt = is_optimization(cfg.scenario);
    const Algorithm base_alg = opt ? Algorithm::GTA : Algorithm::DistAvg;
    std::vector<GridPoint> bgrid;
    for (auto n : cfg.n)
      for (auto p : cfg.p) {
        if (!opt) bgrid.push_back(GridPoint{n, p, 0.0, kTauInfinite, Beta(0.0), 0.0});
        else if (cfg.tune_alpha) bgrid.push_back(GridPoint{n, p, 0.0, 1, Beta(0.0), 0.0});
        else
          for (auto a : cfg.alpha) bgrid.push_back(GridPoint{n, p, 0.0, 1, Beta(0.0), a});
      }
    if (opt && cfg.tune_alpha) {
      parallel_for(bgrid.size(), cfg.jobs, [&](std::size_t bi) {
        const TrialContext& ctx = context(bgrid[bi].n, bgrid[bi].p, 0);
        RunConfig rc;
        rc.algorithm = Algorithm::GTA;
        rc.graph = ctx.graph;
        rc.max_iters = cfg.tune_iters;
        bgrid[bi].alpha = step_size_grid_search(rc, *ctx.objective, ctx.x0, cfg.alpha).best_alpha.value_or(std::nan(""));
      });
    }
    res.baseline_runs.resize(bgrid.size() * T);
    std::vector<std::optional<RunTrace>> btraces(cfg.traces ? res.baseline_runs.size() : 0);
    parallel_for(res.baseline_runs.size(), cfg.jobs, [&](std::size_t idx) {
      const std::size_t bi = idx / T, t = idx % T;
      const GridPoint& pt = bgrid[bi];
      RunRecord rec;
      try {
        if (!std::isfinite(pt.alpha)) throw std::runtime_error("alpha tuning: every step size diverged");
        const TrialContext& ctx = context(pt.n, pt.p, t);
        RunConfig rc;
        rc.algorithm = base_alg;
        rc.graph = ctx.graph;
        rc.alpha = pt.alpha;
        rc.max_iters = cfg.max_iters;
        rc.tolerance = cfg.tolerance;
        RunTrace trace = run(rc, ctx.objective.get(), ctx.x0);
        rec = record_from(trace);
        rec.spectral_gap = spectral_gap(metropolis_hastings(ctx.graph));
        if (cfg.traces) btraces[idx] = std::move(trace);
      } catch (const std::exception& e) {
        rec.status = std::string("error: ") + e.what();
      }
      rec.point = bi;
      rec.trial = t;
      rec.algorithm = to_string(base_alg);
      rec.alpha = pt.alpha;
      res.baseline_runs[idx] = std::move(rec);
    });
    for (std::size_t bi = 0; bi < bgrid.size(); ++bi) {
      std::vector<const RunRecord*> rs;
      for (std::size_t t = 0; t < T; ++t) rs.push_back(&res.baseline_runs[bi * T + t]);
      res.baseline.push_back(summarize(cfg.scenario, to_string(base_alg), bgrid[bi], rs, cfg.tolerance));
    }
    for (std::size_t idx = 0; idx < btraces.size(); ++idx)
      if (btraces[idx])
        res.traces.emplace_back("baseline" + std::to_string(idx / T) + "_trial" + std::to_string(idx % T), std::move(*btraces[idx]));
  }
  return res;
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << kSummaryHeader << '\n';
  for (const auto& r : rows) {
    out << to_string(r.scenario) << ',' << r.algorithm << ',' << r.point.n << ',' << format_real(r.point.p) << ','
        << format_real(r.point.kappa) << ',' << format_tau(r.point.tau) << ',' << format_beta(r.point.beta) << ','
        << format_real(r.point.alpha) << ',' << r.trials << ',' << r.converged << ',' << format_real(r.volume_mean)
        << ',' << format_real(r.volume_median) << ',' << format_real(r.rounds_mean) << ','
        << format_real(r.rounds_median) << ',' << format_real(r.iterations_mean) << ','
        << format_real(r.spectral_gap_mean) << ',' << format_real(r.consensus_error_mean) << ','
        << format_real(r.optimality_error_mean) << ',' << r.status << '\n';
  }
}

void write_runs_csv(std::ostream& out, const std::vector<GridPoint>& grid, const std::vector<RunRecord>& runs) {
  out << kRunsHeader << '\n';
  for (const auto& r : runs) {
    const GridPoint& pt = grid.at(r.point);
    std::string status = r.status;
    std::replace(status.begin(), status.end(), ',', ';');
    std::replace(status.begin(), status.end(), '\n', ' ');
    out << r.point << ',' << r.trial << ',' << r.algorithm << ',' << pt.n << ',' << format_real(pt.p) << ','
        << format_real(pt.kappa) << ',' << format_tau(pt.tau) << ',' << format_beta(pt.beta) << ','
        << format_real(r.alpha) << ',' << r.volume << ',' << r.rounds << ',' << r.iterations << ','
        << format_real(r.consensus_error) << ',' << format_real(r.optimality_error) << ','
        << format_real(r.spectral_gap) << ',' << status << '\n';
  }
}

void write_budget_csv(std::ostream& out, const std::vector<BudgetRow>& rows) {
  out << kBudgetHeader << '\n';
  for (const auto& r : rows) {
    out << r.point.n << ',' << format_real(r.point.p) << ',' << format_real(r.point.kappa) << ',' << r.trial << ','
        << r.T << ',' << r.T_prune << ',' << format_real(r.error_reference) << ',' << format_real(r.error_pruned)
        << ',' << format_real(r.gap_reference) << ',' << format_real(r.gap_pruned) << ','
        << (r.pruned_connected ? "true" : "false") << '\n';
  }
}

void write_sweep_outputs(const ExperimentConfig& cfg, const SweepResult& result) {
  namespace fs = std::filesystem;
  const fs::path dir(cfg.out);
  fs::create_directories(dir);
  write_file(dir / "config.json", [&](std::ostream& o) { o << config_to_json(cfg) << '\n'; });
  write_file(dir / "summary.csv", [&](std::ostream& o) { write_summary_csv(o, result.summary); });
  if (!result.baseline.empty())
    write_file(dir / "baseline.csv", [&](std::ostream& o) { write_summary_csv(o, result.baseline); });
  if (!result.runs.empty())
    write_file(dir / "runs.csv", [&](std::ostream& o) { write_runs_csv(o, result.grid, result.runs); });
  if (!result.budget.empty())
    write_file(dir / "budget.csv", [&](std::ostream& o) { write_budget_csv(o, result.budget); });
  if (!result.traces.empty()) {
    fs::create_directories(dir / "traces");
    for (const auto& [tag, trace] : result.traces)
      write_file(dir / "traces" / (tag + ".csv"), [&](std::ostream& o) { write_trace_csv(o, trace); });
  }
}

}  // namespace adcons
