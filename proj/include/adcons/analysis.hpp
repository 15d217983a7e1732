#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "adcons/algorithms.hpp"
#include "adcons/graph.hpp"
#include "adcons/mixing.hpp"
#include "adcons/pruning.hpp"

namespace adcons {

/// Constants of the consensus envelope.
///   q       lower bound on every positive mixing weight
///   tau_bar connectivity window, in cycles
///   d_G     diameter of the reference graph
struct EnvelopeParams {
  double q = 0.0;
  std::size_t tau_bar = 1;
  std::size_t d_G = 1;

  /// 1 - q^(tau_bar d_G): contraction per window in the consensus envelope.
  double gamma_thm1() const;
  /// q^(d_G tau_bar): the quantity the step-size corollary calls gamma.
  double gamma_cor1() const;

  /// Throws std::invalid_argument unless 0 < q < 1, tau_bar >= 1, d_G >= 1.
  void validate() const;

  /// q = 1 / (1 + max degree), d_G = diameter. Throws on a disconnected graph.
  static EnvelopeParams for_graph(const Graph& reference, std::size_t tau_bar);
};

struct EnvelopeRow {
  std::size_t k = 0;
  double actual = 0.0;  // ||x_k - xbar_k||
  double bound = 0.0;
  double margin = 0.0;  // bound / actual, +inf when actual is 0
};

struct EnvelopeReport {
  std::vector<EnvelopeRow> rows;
  bool bound_holds = true;
  std::optional<std::size_t> first_bound_violation;  // k
  bool assumption_holds = true;
  std::optional<std::size_t> assumption_violation_cycle;  // last cycle of the first bad window
  double min_margin = 0.0;
  std::size_t tau_bar = 1;

  bool ok() const { return bound_holds && assumption_holds; }
};

/// Index of the last cycle of the first window of `tau_bar` consecutive graphs
/// whose union is disconnected; nullopt when every window is connected.
std::optional<std::size_t> first_disconnected_window(std::span<const Graph> cycle_graphs, std::size_t tau_bar);

/// Smallest tau_bar for which every window of that many consecutive graphs has
/// a connected union. nullopt when even the union of all of them is not.
std::optional<std::size_t> measure_connectivity_window(std::span<const Graph> cycle_graphs);

/// Checks ||x_k - xbar_k|| <= n^{3/2} gamma^floor(k / (tau_bar d_G)) ||x_0 - xbar_0||
/// along the trace. The trace needs record_cycles so the connectivity window
/// can be verified; a window failure is reported separately from a bound failure.
EnvelopeReport theorem1_envelope(const RunTrace& trace, const EnvelopeParams& params);

/// 2 (1 + tau_hat^2) max_{tau_hat <= j <= k} ||Q[j - tau_hat : j] - 11^T/n||^2.
/// Throws std::out_of_range unless 1 <= tau_hat <= k <= seq.size().
double compute_rho_prime(std::span<const MixingMatrix> seq, std::size_t k, std::size_t tau_hat);

/// ceil(max(ln(16 n^3 tau_bar^2 d_G^2), 16 ln(4 / g)) / g) with g = gamma_cor1().
std::uint64_t corollary_eta(const EnvelopeParams& params, std::size_t n);

struct StepSizeReport {
  std::size_t tau_hat = 0;
  double rho_prime = 0.0;
  std::uint64_t eta = 0;
  std::uint64_t tau_eta = 0;
  double alpha_max = 0.0;
  bool admissible = false;  // 0 < rho_prime < 1/4
  /// 2 (1 + tau_eta^2) max deviation^2 < 1/4 on the supplied sequence;
  /// nullopt without a sequence or when it is shorter than tau_eta.
  std::optional<bool> certified;
  std::optional<double> rho_prime_at_tau_eta;
};

/// alpha_max = min(1, sqrt(rho') / (58 L tau_hat^2)).
///
/// Without a sequence tau_hat = tau_eta and rho' = 1/4 (the cap the corollary
/// certifies). With one, every window up to min(tau_eta, |seq|) is scanned and
/// the admissible window with the largest alpha_max is reported.
StepSizeReport suggest_step_size(const EnvelopeParams& params, std::size_t n, double L,
                                 std::span<const MixingMatrix> seq = {});

struct BudgetOptions {
  Beta beta{1.0};
  std::optional<double> kappa_lower;  // default 1 - kappa
  std::uint64_t seed = 0;
};

struct BudgetReport {
  double kappa = 0.0;
  double kappa_realized = 0.0;  // 1 - |E_pruned| / |E|
  std::size_t edges = 0;
  std::size_t pruned_edges = 0;
  std::uint64_t T = 0;                // B / (2 D |E|)
  std::uint64_t T_prune = 0;          // B / (2 D |E_pruned|)
  std::uint64_t T_prune_nominal = 0;  // T / (1 - kappa)
  double error_reference = 0.0;
  double error_pruned = 0.0;
  double gap_reference = 0.0;
  double gap_pruned = 0.0;
  bool pruned_connected = true;
};

/// Fixed-budget comparison: dist-avg on the reference graph for T iterations
/// against dist-avg on a single static prune for T_prune iterations. Both
/// errors use the reference edge set.
BudgetReport budget_comparison(const Graph& graph, double kappa, double bits_budget, double bits_per_vector,
                               const Matrix& x0, const BudgetOptions& opts = {});

/// Same comparison with the pruned graph supplied directly.
BudgetReport budget_comparison(const Graph& graph, const Graph& pruned, double kappa, double bits_budget,
                               double bits_per_vector, const Matrix& x0);

void write_envelope_csv(std::ostream& out, const EnvelopeReport& report);
std::string envelope_summary_json(const EnvelopeReport& report, const EnvelopeParams& params);
std::string step_size_json(const StepSizeReport& report);
std::string budget_json(const BudgetReport& report);

}  // namespace adcons
