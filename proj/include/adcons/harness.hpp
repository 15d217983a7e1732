#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "adcons/algorithms.hpp"
#include "adcons/problems.hpp"

namespace adcons {

/// Invalid experiment configuration (bad JSON, unknown key, empty grid...).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Scenario { Consensus, Linreg, Logreg, Budget };

std::string to_string(Scenario s);
Scenario scenario_from_string(const std::string& s);

/// One experiment. Grids are crossed; every grid point runs `trials` times on
/// the same per-trial graphs, initial states and data.
struct ExperimentConfig {
  Scenario scenario = Scenario::Consensus;
  Algorithm algorithm = Algorithm::AC;

  std::vector<std::size_t> n{64};
  std::vector<double> p{0.8};
  std::vector<double> kappa{0.75};
  std::vector<std::size_t> tau{10};  // kTauInfinite allowed
  std::vector<Beta> beta{Beta(1.0)};
  std::vector<double> alpha{0.01};
  std::optional<double> kappa_lower;  // default 1 - kappa

  std::size_t trials = 20;
  std::uint64_t seed = 0;
  double tolerance = 1e-10;
  std::size_t max_iters = 100000;
  std::size_t dim = 10;

  bool count_pruning_overhead = true;
  bool shared_prune = false;
  std::optional<std::size_t> refresh_period;
  RefreshPolicy refresh_policy = RefreshPolicy::Periodic;
  bool baseline = true;  // dist-avg (consensus) or GTA (optimization) rows

  // Optimization scenarios.
  std::size_t samples = 3200;  // synthetic linreg
  double noise = 0.1;
  double lambda = 0.0;
  std::string data;  // CSV path (logreg, or linreg from file)
  std::string label_col = "label";
  bool normalize = true;
  bool tune_alpha = false;  // pick alpha per grid point by grid search
  std::size_t tune_iters = 300;

  // Budget scenario.
  double bits = 1e6;
  double bits_per_vector = 320;

  std::string out = "out";
  std::size_t jobs = 1;
  bool traces = false;

  /// Throws ConfigError.
  void validate() const;
};

/// Strict JSON parse: unknown keys are errors. Scalars are accepted where a
/// grid is expected; tau accepts "inf", beta accepts "greedy".
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
std::string config_to_json(const ExperimentConfig& cfg);

/// %.17g; the empty string for nullopt.
std::string format_real(double v);
std::string format_real(const std::optional<double>& v);
std::string format_tau(std::size_t tau);
std::string format_beta(const Beta& b);

inline constexpr const char* kTraceHeader = "k,comm_volume,comm_rounds,consensus_error,optimality_error,spectral_gap,status";
void write_trace_csv(std::ostream& out, const RunTrace& trace);

struct GridPoint {
  std::size_t n = 0;
  double p = 0.0;
  double kappa = 0.0;
  std::size_t tau = 0;
  Beta beta;
  double alpha = 0.0;
};

/// Result of one (grid point, trial) run.
struct RunRecord {
  std::size_t point = 0;
  std::size_t trial = 0;
  std::string algorithm;
  double alpha = 0.0;
  std::uint64_t volume = 0;
  std::uint64_t rounds = 0;
  std::size_t iterations = 0;
  double consensus_error = 0.0;
  std::optional<double> optimality_error;
  std::optional<double> spectral_gap;  // mean over cycles
  std::string status;                  // converged | max_iters | diverged | error: ...
};

/// Aggregate over the trials of one grid point.
struct SummaryRow {
  Scenario scenario = Scenario::Consensus;
  std::string algorithm;
  GridPoint point;
  std::size_t trials = 0;
  std::size_t converged = 0;
  double volume_mean = 0.0;
  double volume_median = 0.0;
  double rounds_mean = 0.0;
  double rounds_median = 0.0;
  double iterations_mean = 0.0;
  std::optional<double> spectral_gap_mean;
  double consensus_error_mean = 0.0;
  std::optional<double> optimality_error_mean;
  std::string status;  // ok | partial | failed
};

struct BudgetRow {
  GridPoint point;
  std::size_t trial = 0;
  std::string report_json;
  double error_reference = 0.0;
  double error_pruned = 0.0;
  double gap_reference = 0.0;
  double gap_pruned = 0.0;
  std::uint64_t T = 0;
  std::uint64_t T_prune = 0;
  bool pruned_connected = true;
};

struct SweepResult {
  std::vector<GridPoint> grid;
  std::vector<RunRecord> runs;         // grid order, then trial
  std::vector<SummaryRow> summary;     // exactly one per grid point
  std::vector<RunRecord> baseline_runs;
  std::vector<SummaryRow> baseline;    // one per (n, p[, alpha])
  std::vector<BudgetRow> budget;
  std::vector<std::pair<std::string, RunTrace>> traces;  // when cfg.traces
};

std::vector<GridPoint> expand_grid(const ExperimentConfig& cfg);

/// Executes the sweep with up to cfg.jobs threads. Output is independent of
/// the thread count.
SweepResult run_sweep(const ExperimentConfig& cfg);

/// Writes summary.csv, runs.csv, baseline.csv (when present), budget.csv
/// (budget scenario), config.json and traces/<tag>.csv under cfg.out.
void write_sweep_outputs(const ExperimentConfig& cfg, const SweepResult& result);

inline constexpr const char* kSummaryHeader =
    "scenario,algorithm,n,p,kappa,tau,beta,alpha,trials,converged,volume_mean,volume_median,rounds_mean,"
    "rounds_median,iterations_mean,spectral_gap_mean,consensus_error_mean,optimality_error_mean,status";
inline constexpr const char* kRunsHeader =
    "point,trial,algorithm,n,p,kappa,tau,beta,alpha,volume,rounds,iterations,consensus_error,optimality_error,"
    "spectral_gap,status";
inline constexpr const char* kBudgetHeader =
    "n,p,kappa,trial,T,T_prune,error_reference,error_pruned,gap_reference,gap_pruned,pruned_connected";

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);
void write_runs_csv(std::ostream& out, const std::vector<GridPoint>& grid, const std::vector<RunRecord>& runs);
void write_budget_csv(std::ostream& out, const std::vector<BudgetRow>& rows);

struct GridSearchEntry {
  double alpha = 0.0;
  double final_error = 0.0;
  bool diverged = false;
};

struct GridSearchResult {
  std::optional<double> best_alpha;  // nullopt when every run diverged
  std::vector<GridSearchEntry> entries;
  bool all_diverged() const { return !best_alpha.has_value(); }
};

/// Runs `run(alpha)` for every alpha (tolerance off, to the iteration cap) and
/// picks the smallest final optimality error; ties go to the larger alpha.
/// Diverged runs (non-finite or error above 1e10) are never picked.
GridSearchResult step_size_grid_search(const std::vector<double>& alphas,
                                       const std::function<RunTrace(double)>& run);

/// Grid search for acgt/gta with `base` as the template config.
GridSearchResult step_size_grid_search(const RunConfig& base, const Objective& objective, const Matrix& x0,
                                       const std::vector<double>& alphas);

/// Standard-normal n x d matrix, deterministic per seed.
Matrix gaussian_states(std::size_t n, std::size_t d, std::uint64_t seed);

/// Connected G(n, p): redraws with derived seeds until connected (at most
/// 1000 attempts, then throws).
Graph connected_erdos_renyi(std::size_t n, double p, std::uint64_t seed);

}  // namespace adcons
