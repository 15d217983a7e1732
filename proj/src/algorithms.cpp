#include "adcons/algorithms.hpp"

#include <cmath>
#include <deque>
#include <numeric>
#include <random>
#include <stdexcept>

#include "adcons/metrics.hpp"

namespace adcons {

namespace {

constexpr double kDivergenceThreshold = 1e10;
constexpr double kTrackingTolerance = 1e-9;

struct CycleMixing {
  Graph graph;
  MixingMatrix mixing;
  bool refreshed = false;
  bool pruned = false;  // the protocol ran (its exchange is billed)
};

/// Builds the communication graph for one cycle and one estimate family.
class CycleBuilder {
 public:
  CycleBuilder(const RunConfig& cfg, std::uint64_t pass) : cfg_(cfg), pass_(pass) {}

  CycleMixing build(const Matrix& estimates, std::size_t cycle) {
    CycleMixing out;
    const auto period = cfg_.refresh_period;
    if (period && *period == 0) throw std::invalid_argument("refresh_period must be >= 1");

    if (period && cfg_.refresh_policy == RefreshPolicy::Periodic && cycle % *period == *period - 1) {
      out.graph = cfg_.graph;
      out.refreshed = true;
    } else if (!any_candidates()) {
      // Nothing to select anywhere: the protocol is a no-op and nobody exchanges.
      out.graph = cfg_.graph;
    } else {
      out.graph = execute_pruning(cfg_.graph, estimates, cfg_.prune, PruneStream{cfg_.seed, cycle, pass_}).pruned_graph;
      out.pruned = true;
      if (period && cfg_.refresh_policy == RefreshPolicy::WhenDisconnected) {
        std::vector<Graph> window(history_.begin(), history_.end());
        window.push_back(out.graph);
        if (!is_connected(graph_union(window))) {
          out.graph = cfg_.graph;
          out.refreshed = true;
        }
      }
    }
    if (period) {
      history_.push_back(out.graph);
      while (history_.size() + 1 > *period) history_.pop_front();
    }
    out.mixing = metropolis_hastings(out.graph);
    return out;
  }

 private:
  bool any_candidates() const {
    for (NodeId i = 0; i < cfg_.graph.size(); ++i)
      if (candidate_budget(cfg_.prune.upper(i), cfg_.graph.degree(i)) > 0) return true;
    return false;
  }

  const RunConfig& cfg_;
  std::uint64_t pass_;
  std::deque<Graph> history_;  // last R-1 cycle graphs
};

bool is_cycle_start(std::size_t k, std::size_t tau) {
  if (tau == 0) throw std::invalid_argument("tau must be >= 1");
  if (tau == kTauInfinite) return k == 0;
  return k % tau == 0;
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

class TraceRecorder {
 public:
  TraceRecorder(RunTrace& trace, const Graph& reference, bool record_states)
      : trace_(trace), reference_(reference), record_states_(record_states) {}

  TraceRow& record(std::size_t k, const Matrix& x) {
    TraceRow row;
    row.k = k;
    row.comm_volume = trace_.ledger.volume;
    row.comm_rounds = trace_.ledger.rounds;
    row.consensus_error = avg_consensus_error(reference_, x);
    row.status = "ok";
    trace_.rows.push_back(std::move(row));
    trace_.disagreement.push_back(disagreement_norm(x));
    if (record_states_) trace_.states.push_back(x);
    return trace_.rows.back();
  }

  void finish(const Matrix& x, bool converged, bool diverged) {
    trace_.final_state = x;
    trace_.converged = converged;
    trace_.diverged = diverged;
    if (!trace_.rows.empty()) trace_.rows.back().status = diverged ? "diverged" : converged ? "converged" : "max_iters";
  }

 private:
  RunTrace& trace_;
  const Graph& reference_;
  bool record_states_;
};

void check_states(const Graph& g, const Matrix& x0) {
  if (static_cast<std::size_t>(x0.rows()) != g.size())
    throw std::invalid_argument("initial states need one row per node (" + std::to_string(g.size()) + ")");
}

std::uint64_t directed_edges(const Graph& g) { return 2 * static_cast<std::uint64_t>(g.edge_count()); }

void note_cycle(RunTrace& trace, const RunConfig& cfg, std::size_t k, const CycleMixing& x_cycle,
                const CycleMixing* y_cycle) {
  trace.max_degree_seen = std::max(trace.max_degree_seen, x_cycle.graph.max_degree());
  if (y_cycle) trace.max_degree_seen = std::max(trace.max_degree_seen, y_cycle->graph.max_degree());
  if (cfg.track_spectral_gap) trace.cycle_gaps.push_back(spectral_gap(x_cycle.mixing));
  if (cfg.track_spectral_gap && !trace.rows.empty()) trace.rows.back().spectral_gap = trace.cycle_gaps.back();
  if (cfg.record_cycles) {
    CycleRecord rec{.start = k, .length = 0, .graph = x_cycle.graph, .mixing = x_cycle.mixing,
                    .y_graph = {}, .y_mixing = {}, .refreshed = x_cycle.refreshed};
    if (y_cycle) {
      rec.y_graph = y_cycle->graph;
      rec.y_mixing = y_cycle->mixing;
    }
    trace.cycles.push_back(std::move(rec));
  }
}

// Shared by ac_run and dist_avg_run; `adaptive` false pins the reference graph.
RunTrace consensus_engine(const RunConfig& cfg, const Matrix& x0, bool adaptive) {
  const Graph& ref = cfg.graph;
  check_states(ref, x0);

  RunTrace trace;
  trace.ledger.pruning_overhead_counted = adaptive && cfg.count_pruning_overhead;
  TraceRecorder rec(trace, ref, cfg.record_states);
  CycleBuilder builder(cfg, 0);

  Matrix x = x0;
  rec.record(0, x);
  bool converged = cfg.tolerance > 0.0 && trace.rows.back().consensus_error <= cfg.tolerance;
  bool diverged = false;

  CycleMixing current;
  std::size_t cycle = 0;
  for (std::size_t k = 0; k < cfg.max_iters && !converged && !diverged; ++k) {
    if (k == 0 || (adaptive && is_cycle_start(k, cfg.tau))) {
      if (adaptive) {
        current = builder.build(x, cycle++);
        if (current.pruned && cfg.count_pruning_overhead) {
          trace.ledger.volume += directed_edges(ref);
          trace.ledger.rounds += 1;
        }
      } else {
        current = CycleMixing{ref, metropolis_hastings(ref), false, false};
      }
      note_cycle(trace, cfg, k, current, nullptr);
    }

    x = current.mixing.weights() * x;
    trace.ledger.volume += directed_edges(current.graph);
    trace.ledger.rounds += 1;
    if (!trace.cycles.empty()) ++trace.cycles.back().length;

    const TraceRow& row = rec.record(k + 1, x);
    diverged = !all_finite(x);
    converged = !diverged && cfg.tolerance > 0.0 && row.consensus_error <= cfg.tolerance;
  }
  rec.finish(x, converged, diverged);
  return trace;
}

// Shared by acgt_run and gta_run.
RunTrace tracking_engine(const RunConfig& cfg, const Objective& obj, const Matrix& x0, bool adaptive) {
  const Graph& ref = cfg.graph;
  check_states(ref, x0);
  if (obj.nodes() != ref.size() || static_cast<std::size_t>(x0.cols()) != obj.dim())
    throw std::invalid_argument("objective shape does not match graph / initial iterates");
  if (!(cfg.alpha > 0.0)) throw std::invalid_argument("step size alpha must be > 0");

  RunTrace trace;
  trace.ledger.pruning_overhead_counted = adaptive && cfg.count_pruning_overhead;
  TraceRecorder rec(trace, ref, cfg.record_states);
  CycleBuilder x_builder(cfg, 0);
  CycleBuilder y_builder(cfg, 1);
  const double f_star = obj.optimal_value();

  Matrix x = x0;
  Matrix grad = obj.stacked_gradients(x);
  Matrix y = grad;

  auto optimality = [&](const Matrix& states) { return obj.value(node_mean(states)) - f_star; };
  auto tracking_gap = [&] { return (node_mean(y) - node_mean(grad)).cwiseAbs().maxCoeff(); };

  rec.record(0, x).optimality_error = optimality(x);
  bool converged = cfg.tolerance > 0.0 && *trace.rows.back().optimality_error <= cfg.tolerance;
  bool diverged = false;

  CycleMixing x_cycle, y_cycle;
  std::size_t cycle = 0;
  for (std::size_t k = 0; k < cfg.max_iters && !converged && !diverged; ++k) {
    if (k == 0 || (adaptive && is_cycle_start(k, cfg.tau))) {
      if (adaptive) {
        const std::size_t c = cycle++;
        x_cycle = x_builder.build(x, c);
        y_cycle = cfg.shared_prune ? x_cycle : y_builder.build(y, c);
        const std::uint64_t families = (x_cycle.pruned ? 1 : 0) + (!cfg.shared_prune && y_cycle.pruned ? 1 : 0);
        if (families > 0 && cfg.count_pruning_overhead) {
          trace.ledger.volume += families * directed_edges(ref);
          trace.ledger.rounds += 1;
        }
      } else {
        x_cycle = CycleMixing{ref, metropolis_hastings(ref), false, false};
        y_cycle = x_cycle;
      }
      note_cycle(trace, cfg, k, x_cycle, cfg.shared_prune || !adaptive ? nullptr : &y_cycle);
    }

    Matrix x_next = x_cycle.mixing.weights() * (x - cfg.alpha * y);
    Matrix grad_next = obj.stacked_gradients(x_next);
    y = y_cycle.mixing.weights() * y + grad_next - grad;
    x = std::move(x_next);
    grad = std::move(grad_next);

    trace.ledger.volume += directed_edges(x_cycle.graph) + directed_edges(y_cycle.graph);
    trace.ledger.rounds += 1;
    if (!trace.cycles.empty()) ++trace.cycles.back().length;

    const double gap = tracking_gap();
    trace.max_tracking_gap = std::max(trace.max_tracking_gap, gap);
    if (cfg.check_tracking && !(gap <= kTrackingTolerance))
      throw std::runtime_error("gradient tracking identity violated at k=" + std::to_string(k + 1));

    TraceRow& row = rec.record(k + 1, x);
    const double opt = optimality(x);
    row.optimality_error = opt;
    diverged = !all_finite(x) || !std::isfinite(opt) || std::abs(opt) > kDivergenceThreshold;
    converged = !diverged && cfg.tolerance > 0.0 && opt <= cfg.tolerance;
  }
  rec.finish(x, converged, diverged);
  return trace;
}

}  // namespace

double RunTrace::mean_cycle_gap() const {
  if (cycle_gaps.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::accumulate(cycle_gaps.begin(), cycle_gaps.end(), 0.0) / static_cast<double>(cycle_gaps.size());
}

std::vector<MixingMatrix> RunTrace::iteration_matrices() const {
  std::vector<MixingMatrix> out;
  for (const auto& c : cycles)
    for (std::size_t t = 0; t < c.length; ++t) out.push_back(c.mixing);
  return out;
}

Matrix Objective::stacked_gradients(const Matrix& x) const {
  Matrix g(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    g.row(i) = local_gradient(static_cast<std::size_t>(i), x.row(i).transpose()).transpose();
  return g;
}

RunTrace ac_run(const RunConfig& cfg, const Matrix& x0) { return consensus_engine(cfg, x0, true); }

RunTrace acgt_run(const RunConfig& cfg, const Objective& objective, const Matrix& x0) {
  return tracking_engine(cfg, objective, x0, true);
}

RunTrace dist_avg_run(const Graph& graph, const Matrix& x0, std::size_t max_iters, double tolerance,
                      bool record_states) {
  RunConfig cfg;
  cfg.algorithm = Algorithm::DistAvg;
  cfg.graph = graph;
  cfg.max_iters = max_iters;
  cfg.tolerance = tolerance;
  cfg.record_states = record_states;
  return consensus_engine(cfg, x0, false);
}

RunTrace gta_run(const Graph& graph, const Objective& objective, const Matrix& x0, double alpha, std::size_t max_iters,
                 double tolerance, bool check_tracking) {
  RunConfig cfg;
  cfg.algorithm = Algorithm::GTA;
  cfg.graph = graph;
  cfg.alpha = alpha;
  cfg.max_iters = max_iters;
  cfg.tolerance = tolerance;
  cfg.check_tracking = check_tracking;
  return tracking_engine(cfg, objective, x0, false);
}

RunTrace random_gossip_run(const Graph& graph, const Matrix& x0, std::size_t max_iters, double tolerance,
                           std::uint64_t seed, bool record_states) {
  check_states(graph, x0);
  RunTrace trace;
  trace.ledger.pruning_overhead_counted = false;
  TraceRecorder rec(trace, graph, record_states);
  const auto edges = graph.edges();

  Matrix x = x0;
  rec.record(0, x);
  bool converged = tolerance > 0.0 && trace.rows.back().consensus_error <= tolerance;
  std::mt19937_64 rng(seed);
  for (std::size_t k = 0; k < max_iters && !converged && !edges.empty(); ++k) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    const auto [i, j] = edges[static_cast<std::size_t>(u * static_cast<double>(edges.size()))];
    const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
    const Eigen::RowVectorXd avg = 0.5 * (x.row(ii) + x.row(jj));
    x.row(ii) = avg;
    x.row(jj) = avg;
    trace.ledger.volume += 2;
    trace.ledger.rounds += 1;
    const TraceRow& row = rec.record(k + 1, x);
    converged = tolerance > 0.0 && row.consensus_error <= tolerance;
  }
  rec.finish(x, converged, false);
  return trace;
}

RunTrace run(const RunConfig& cfg, const Objective* objective, const Matrix& x0) {
  auto need_objective = [&]() -> const Objective& {
    if (!objective) throw std::invalid_argument(to_string(cfg.algorithm) + " needs an objective");
    return *objective;
  };
  switch (cfg.algorithm) {
    case Algorithm::AC: return ac_run(cfg, x0);
    case Algorithm::DistAvg: return dist_avg_run(cfg.graph, x0, cfg.max_iters, cfg.tolerance, cfg.record_states);
    case Algorithm::RandomGossip:
      return random_gossip_run(cfg.graph, x0, cfg.max_iters, cfg.tolerance, cfg.seed, cfg.record_states);
    case Algorithm::ACGT: return acgt_run(cfg, need_objective(), x0);
    case Algorithm::GTA: {
      RunConfig fixed = cfg;
      return tracking_engine(fixed, need_objective(), x0, false);
    }
  }
  throw std::invalid_argument("unknown algorithm");
}

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::AC: return "ac";
    case Algorithm::ACGT: return "acgt";
    case Algorithm::DistAvg: return "dist-avg";
    case Algorithm::RandomGossip: return "gossip";
    case Algorithm::GTA: return "gta";
  }
  return "?";
}

Algorithm algorithm_from_string(const std::string& s) {
  if (s == "ac") return Algorithm::AC;
  if (s == "acgt" || s == "ac-gt") return Algorithm::ACGT;
  if (s == "dist-avg" || s == "dist_avg") return Algorithm::DistAvg;
  if (s == "gossip" || s == "random-gossip") return Algorithm::RandomGossip;
  if (s == "gta") return Algorithm::GTA;
  throw std::invalid_argument("unknown algorithm '" + s + "'");
}

}  // namespace adcons
