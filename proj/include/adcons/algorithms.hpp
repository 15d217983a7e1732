#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "adcons/graph.hpp"
#include "adcons/linalg.hpp"
#include "adcons/mixing.hpp"
#include "adcons/pruning.hpp"

namespace adcons {

enum class Algorithm { AC, ACGT, DistAvg, RandomGossip, GTA };

/// tau = infinity: prune once at k = 0, never again.
inline constexpr std::size_t kTauInfinite = std::numeric_limits<std::size_t>::max();

/// How refresh_period is enforced.
///   Periodic: every R-th cycle (cycles R-1, 2R-1, ...) skips pruning and uses
///     the reference graph.
///   WhenDisconnected: a cycle whose pruned graph, united with the previous
///     R-1 cycle graphs, is disconnected falls back to the reference graph.
///     Every window of R consecutive cycle graphs then has a connected union.
enum class RefreshPolicy { Periodic, WhenDisconnected };

struct RunConfig {
  Algorithm algorithm = Algorithm::AC;
  Graph graph;  // reference graph
  PruneParams prune;
  std::size_t tau = 10;
  double alpha = 0.0;
  bool shared_prune = false;  // AC-GT: reuse the x-pruned graph for y
  std::optional<std::size_t> refresh_period;
  RefreshPolicy refresh_policy = RefreshPolicy::Periodic;
  std::size_t max_iters = 1000;
  std::uint64_t seed = 0;
  double tolerance = 0.0;  // <= 0 disables early stopping
  bool count_pruning_overhead = true;

  bool record_states = false;
  bool record_cycles = false;
  bool track_spectral_gap = false;
  bool check_tracking = false;  // throw when the y-average drifts from the mean gradient
};

struct CommLedger {
  std::uint64_t volume = 0;  // d-vectors sent over directed edges
  std::uint64_t rounds = 0;  // synchronized communication rounds
  bool pruning_overhead_counted = true;
};

struct TraceRow {
  std::size_t k = 0;
  std::uint64_t comm_volume = 0;
  std::uint64_t comm_rounds = 0;
  double consensus_error = 0.0;
  std::optional<double> optimality_error;
  std::optional<double> spectral_gap;
  std::string status;
};

/// Mixing used for iterations [start, start + length).
struct CycleRecord {
  std::size_t start = 0;
  std::size_t length = 0;
  Graph graph;
  MixingMatrix mixing;
  std::optional<Graph> y_graph;  // AC-GT with separate y pruning
  std::optional<MixingMatrix> y_mixing;
  bool refreshed = false;
};

struct RunTrace {
  std::vector<TraceRow> rows;          // row k describes x_k
  std::vector<double> disagreement;    // ||x_k - xbar_k||, one per row
  std::vector<Matrix> states;          // when record_states
  std::vector<CycleRecord> cycles;     // when record_cycles
  std::vector<double> cycle_gaps;      // when track_spectral_gap
  std::size_t max_degree_seen = 0;     // over all mixing graphs used
  double max_tracking_gap = 0.0;       // AC-GT / GTA
  CommLedger ledger;
  Matrix final_state;
  bool converged = false;
  bool diverged = false;

  std::size_t iterations() const { return rows.empty() ? 0 : rows.back().k; }
  double mean_cycle_gap() const;

  /// One matrix per executed iteration (Q_0, Q_1, ...), expanded from the
  /// cycle records. Requires record_cycles.
  std::vector<MixingMatrix> iteration_matrices() const;
};

/// Local objectives f_1..f_n for the gradient-tracking engines.
class Objective {
 public:
  virtual ~Objective() = default;
  virtual std::size_t nodes() const = 0;
  virtual std::size_t dim() const = 0;
  virtual Vector local_gradient(std::size_t i, const Vector& x) const = 0;
  /// Network objective (1/n) sum_i f_i(x).
  virtual double value(const Vector& x) const = 0;
  /// Minimum of value(); optimality error is value(xbar) - optimal_value().
  virtual double optimal_value() const = 0;

  /// Row i is grad f_i evaluated at row i of `x`.
  Matrix stacked_gradients(const Matrix& x) const;
};

/// Adaptive Consensus. Prunes at k = 0, tau, 2 tau, ... and averages with the
/// Metropolis-Hastings weights of the current pruned graph in between.
RunTrace ac_run(const RunConfig& cfg, const Matrix& x0);

/// Adaptive-consensus gradient tracking. y_0 = local gradients at x_0.
RunTrace acgt_run(const RunConfig& cfg, const Objective& objective, const Matrix& x0);

/// Fixed Metropolis-Hastings averaging on the reference graph.
RunTrace dist_avg_run(const Graph& graph, const Matrix& x0, std::size_t max_iters, double tolerance,
                      bool record_states = false);

/// One uniformly random edge per round; both endpoints average.
RunTrace random_gossip_run(const Graph& graph, const Matrix& x0, std::size_t max_iters, double tolerance,
                           std::uint64_t seed, bool record_states = false);

/// Plain gradient tracking with the reference-graph weights.
RunTrace gta_run(const Graph& graph, const Objective& objective, const Matrix& x0, double alpha, std::size_t max_iters,
                 double tolerance = 0.0, bool check_tracking = false);

/// Dispatch on cfg.algorithm. `objective` may be null for consensus algorithms.
RunTrace run(const RunConfig& cfg, const Objective* objective, const Matrix& x0);

std::string to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& s);

}  // namespace adcons
