#include "adcons/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "adcons/metrics.hpp"
#include "json.hpp"

namespace adcons {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

double EnvelopeParams::gamma_thm1() const {
  return 1.0 - std::pow(q, static_cast<double>(tau_bar) * static_cast<double>(d_G));
}

double EnvelopeParams::gamma_cor1() const {
  return std::pow(q, static_cast<double>(d_G) * static_cast<double>(tau_bar));
}

void EnvelopeParams::validate() const {
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("envelope: q must lie in (0, 1)");
  if (tau_bar < 1) throw std::invalid_argument("envelope: tau_bar must be >= 1");
  if (d_G < 1 || d_G == kInfiniteDiameter) throw std::invalid_argument("envelope: d_G must be a finite diameter >= 1");
}

EnvelopeParams EnvelopeParams::for_graph(const Graph& reference, std::size_t tau_bar) {
  const std::size_t d = diameter(reference);
  if (d == kInfiniteDiameter) throw std::invalid_argument("envelope: reference graph is disconnected");
  EnvelopeParams p;
  p.q = 1.0 / (1.0 + static_cast<double>(reference.max_degree()));
  p.tau_bar = tau_bar;
  p.d_G = std::max<std::size_t>(d, 1);
  return p;
}

std::optional<std::size_t> first_disconnected_window(std::span<const Graph> cycle_graphs, std::size_t tau_bar) {
  if (tau_bar == 0) throw std::invalid_argument("tau_bar must be >= 1");
  if (cycle_graphs.size() < tau_bar) {
    // A run shorter than one window: the partial union is all there is.
    if (!cycle_graphs.empty() && !is_connected(graph_union(cycle_graphs))) return cycle_graphs.size() - 1;
    return std::nullopt;
  }
  for (std::size_t end = tau_bar; end <= cycle_graphs.size(); ++end) {
    if (!is_connected(graph_union(cycle_graphs.subspan(end - tau_bar, tau_bar)))) return end - 1;
  }
  return std::nullopt;
}

std::optional<std::size_t> measure_connectivity_window(std::span<const Graph> cycle_graphs) {
  if (cycle_graphs.empty()) return std::nullopt;
  for (std::size_t w = 1; w <= cycle_graphs.size(); ++w)
    if (!first_disconnected_window(cycle_graphs, w)) return w;
  return std::nullopt;
}

EnvelopeReport theorem1_envelope(const RunTrace& trace, const EnvelopeParams& params) {
  params.validate();
  if (trace.disagreement.empty()) throw std::invalid_argument("envelope: empty trace");
  if (trace.cycles.empty()) throw std::invalid_argument("envelope: trace has no cycle records (enable record_cycles)");

  EnvelopeReport rep;
  rep.tau_bar = params.tau_bar;

  std::vector<Graph> graphs;
  graphs.reserve(trace.cycles.size());
  for (const auto& c : trace.cycles) graphs.push_back(c.graph);
  rep.assumption_violation_cycle = first_disconnected_window(graphs, params.tau_bar);
  rep.assumption_holds = !rep.assumption_violation_cycle.has_value();

  const double n = static_cast<double>(trace.final_state.rows());
  const double scale = std::pow(n, 1.5) * trace.disagreement.front();
  const double gamma = params.gamma_thm1();
  const std::size_t window = params.tau_bar * params.d_G;

  rep.min_margin = kInf;
  for (std::size_t idx = 0; idx < trace.disagreement.size(); ++idx) {
    EnvelopeRow row;
    row.k = trace.rows[idx].k;
    row.actual = trace.disagreement[idx];
    row.bound = scale * std::pow(gamma, static_cast<double>(row.k / window));
    row.margin = row.actual > 0.0 ? row.bound / row.actual : kInf;
    if (!(row.actual <= row.bound) && rep.bound_holds) {
      rep.bound_holds = false;
      rep.first_bound_violation = row.k;
    }
    rep.min_margin = std::min(rep.min_margin, row.margin);
    rep.rows.push_back(row);
  }
  return rep;
}

double compute_rho_prime(std::span<const MixingMatrix> seq, std::size_t k, std::size_t tau_hat) {
  if (tau_hat < 1 || tau_hat > k || k > seq.size())
    throw std::out_of_range("compute_rho_prime: need 1 <= tau_hat <= k <= sequence length");
  double worst = 0.0;
  for (std::size_t j = tau_hat; j <= k; ++j)
    worst = std::max(worst, deviation_norm(product_range(seq, j - tau_hat, j)));
  const double t = static_cast<double>(tau_hat);
  return 2.0 * (1.0 + t * t) * worst * worst;
}

std::uint64_t corollary_eta(const EnvelopeParams& params, std::size_t n) {
  params.validate();
  const double g = params.gamma_cor1();
  const double nn = static_cast<double>(n), tb = static_cast<double>(params.tau_bar),
               dg = static_cast<double>(params.d_G);
  const double a = std::log(16.0 * nn * nn * nn * tb * tb * dg * dg);
  const double b = 16.0 * std::log(4.0 / g);
  const double eta = std::ceil(std::max(a, b) / g);
  if (!(eta < 1.8e19)) throw std::overflow_error("corollary_eta: eta does not fit in 64 bits");
  return static_cast<std::uint64_t>(eta);
}

StepSizeReport suggest_step_size(const EnvelopeParams& params, std::size_t n, double L,
                                 std::span<const MixingMatrix> seq) {
  if (!(L > 0.0)) throw std::invalid_argument("suggest_step_size: L must be > 0");
  StepSizeReport rep;
  rep.eta = corollary_eta(params, n);
  rep.tau_eta = rep.eta * params.tau_bar * params.d_G;
  auto alpha_for = [L](double rho, double tau_hat) { return std::min(1.0, std::sqrt(rho) / (58.0 * L * tau_hat * tau_hat)); };

  if (seq.empty()) {
    rep.tau_hat = static_cast<std::size_t>(rep.tau_eta);
    rep.rho_prime = 0.25;
    rep.alpha_max = alpha_for(rep.rho_prime, static_cast<double>(rep.tau_eta));
    rep.admissible = true;
    return rep;
  }

  if (rep.tau_eta <= seq.size()) {
    const auto te = static_cast<std::size_t>(rep.tau_eta);
    rep.rho_prime_at_tau_eta = compute_rho_prime(seq, seq.size(), te);
    rep.certified = *rep.rho_prime_at_tau_eta < 0.25;
  }

  const std::size_t limit = static_cast<std::size_t>(std::min<std::uint64_t>(rep.tau_eta, seq.size()));
  for (std::size_t w = 1; w <= limit; ++w) {
    const double t = static_cast<double>(w);
    // Any window this long has alpha below the best found so far.
    if (rep.admissible && 0.5 / (58.0 * L * t * t) <= rep.alpha_max) break;
    const double rho = compute_rho_prime(seq, seq.size(), w);
    if (!(rho > 0.0 && rho < 0.25)) continue;
    const double a = alpha_for(rho, t);
    if (!rep.admissible || a > rep.alpha_max) {
      rep.admissible = true;
      rep.tau_hat = w;
      rep.rho_prime = rho;
      rep.alpha_max = a;
    }
  }
  return rep;
}

BudgetReport budget_comparison(const Graph& graph, const Graph& pruned, double kappa, double bits_budget,
                               double bits_per_vector, const Matrix& x0) {
  if (pruned.size() != graph.size()) throw std::invalid_argument("budget: graphs differ in node count");
  for (const auto& [i, j] : pruned.edges())
    if (!graph.has_edge(i, j)) throw std::invalid_argument("budget: pruned graph is not a subgraph");
  if (graph.edge_count() == 0) throw std::invalid_argument("budget: reference graph has no edges");
  if (!(bits_budget > 0.0 && bits_per_vector > 0.0)) throw std::invalid_argument("budget: B and D must be > 0");
  if (!(kappa >= 0.0 && kappa < 1.0)) throw std::invalid_argument("budget: kappa must lie in [0, 1)");

  BudgetReport rep;
  rep.kappa = kappa;
  rep.edges = graph.edge_count();
  rep.pruned_edges = pruned.edge_count();
  rep.kappa_realized = 1.0 - static_cast<double>(rep.pruned_edges) / static_cast<double>(rep.edges);
  rep.pruned_connected = is_connected(pruned);

  const double per_iter = 2.0 * bits_per_vector;
  const double T = std::floor(bits_budget / (per_iter * static_cast<double>(rep.edges)));
  rep.T = static_cast<std::uint64_t>(T);
  rep.T_prune_nominal = static_cast<std::uint64_t>(std::floor(T / (1.0 - kappa)));
  rep.T_prune = rep.pruned_edges == 0
                    ? rep.T_prune_nominal
                    : static_cast<std::uint64_t>(std::floor(bits_budget / (per_iter * static_cast<double>(rep.pruned_edges))));

  const auto ref_run = dist_avg_run(graph, x0, rep.T, 0.0);
  rep.error_reference = ref_run.rows.back().consensus_error;
  Matrix x = x0;
  const Matrix q = metropolis_hastings(pruned).weights();
  for (std::uint64_t t = 0; t < rep.T_prune; ++t) x = q * x;
  rep.error_pruned = avg_consensus_error(graph, x);

  rep.gap_reference = spectral_gap(metropolis_hastings(graph));
  rep.gap_pruned = spectral_gap(metropolis_hastings(pruned));
  return rep;
}

BudgetReport budget_comparison(const Graph& graph, double kappa, double bits_budget, double bits_per_vector,
                               const Matrix& x0, const BudgetOptions& opts) {
  if (static_cast<std::size_t>(x0.rows()) != graph.size()) throw std::invalid_argument("budget: one state row per node");
  const PruneParams params = PruneParams::uniform(kappa, opts.kappa_lower.value_or(1.0 - kappa), opts.beta);
  const Graph pruned = execute_pruning(graph, x0, params, PruneStream{opts.seed, 0, 0}).pruned_graph;
  return budget_comparison(graph, pruned, kappa, bits_budget, bits_per_vector, x0);
}

void write_envelope_csv(std::ostream& out, const EnvelopeReport& report) {
  char buf[128];
  out << "k,actual,bound,margin\n";
  for (const auto& r : report.rows) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", r.k, r.actual, r.bound, r.margin);
    out << buf;
  }
}

std::string envelope_summary_json(const EnvelopeReport& report, const EnvelopeParams& params) {
  nlohmann::json j;
  j["pass"] = report.ok();
  j["bound_holds"] = report.bound_holds;
  j["assumption_holds"] = report.assumption_holds;
  j["first_bound_violation"] = report.first_bound_violation ? nlohmann::json(*report.first_bound_violation) : nullptr;
  j["assumption_violation_cycle"] =
      report.assumption_violation_cycle ? nlohmann::json(*report.assumption_violation_cycle) : nullptr;
  j["min_margin"] = number_or_null(report.min_margin);
  j["q"] = params.q;
  j["tau_bar"] = params.tau_bar;
  j["d_G"] = params.d_G;
  j["gamma"] = params.gamma_thm1();
  j["iterations"] = report.rows.empty() ? 0 : report.rows.back().k;
  return j.dump(2);
}

std::string step_size_json(const StepSizeReport& r) {
  nlohmann::json j;
  j["tau_hat"] = r.tau_hat;
  j["rho_prime"] = r.rho_prime;
  j["eta"] = r.eta;
  j["tau_eta"] = r.tau_eta;
  j["alpha_max"] = r.alpha_max;
  j["admissible"] = r.admissible;
  j["certified"] = r.certified ? nlohmann::json(*r.certified) : nullptr;
  j["rho_prime_at_tau_eta"] = r.rho_prime_at_tau_eta ? number_or_null(*r.rho_prime_at_tau_eta) : nullptr;
  return j.dump(2);
}

std::string budget_json(const BudgetReport& r) {
  nlohmann::json j;
  j["kappa"] = r.kappa;
  j["kappa_realized"] = r.kappa_realized;
  j["edges"] = r.edges;
  j["pruned_edges"] = r.pruned_edges;
  j["T"] = r.T;
  j["T_prune"] = r.T_prune;
  j["T_prune_nominal"] = r.T_prune_nominal;
  j["error_reference"] = r.error_reference;
  j["error_pruned"] = r.error_pruned;
  j["gap_reference"] = r.gap_reference;
  j["gap_pruned"] = r.gap_pruned;
  j["pruned_connected"] = r.pruned_connected;
  return j.dump(2);
}

}  // namespace adcons
