#include "adcons/pruning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

#include "json.hpp"

#include "adcons/rng.hpp"

namespace adcons {

namespace {

// Relative slack for floor/ceil of kappa * degree.
constexpr double kRoundingSlack = 1e-9;

// Exponent differences beyond this are treated as zero probability.
constexpr double kMaxExponent = 700.0;

double row_dissimilarity(const Matrix& est, NodeId i, NodeId j, Dissimilarity kind) {
  const auto diff = est.row(static_cast<Eigen::Index>(i)) - est.row(static_cast<Eigen::Index>(j));
  return kind == Dissimilarity::L1 ? diff.lpNorm<1>() : diff.norm();
}

}  // namespace

PruneParams PruneParams::uniform(double kappa_upper, double kappa_lower, Beta beta) {
  PruneParams p;
  p.kappa_upper = {kappa_upper};
  p.kappa_lower = {kappa_lower};
  p.beta = beta;
  return p;
}

void PruneParams::validate(std::size_t n) const {
  auto check_size = [n](const std::vector<double>& v, const char* name) {
    if (v.size() != 1 && v.size() != n)
      throw std::invalid_argument(std::string(name) + " must have 1 or n entries");
  };
  check_size(kappa_upper, "kappa_upper");
  check_size(kappa_lower, "kappa_lower");
  if (!beta.is_greedy() && !(beta.value() >= 0.0)) throw std::invalid_argument("beta must be >= 0 or greedy");
  for (NodeId i = 0; i < n; ++i) {
    const double hi = upper(i);
    const double lo = lower(i);
    if (!(hi >= 0.0 && hi <= 1.0) || !(lo >= 0.0 && lo <= 1.0))
      throw std::invalid_argument("kappa fractions must lie in [0, 1]");
    if (lo > 1.0 - hi + kRoundingSlack)
      throw std::invalid_argument("kappa_lower must not exceed 1 - kappa_upper (node " + std::to_string(i) + ")");
  }
}

double PruneStream::uniform(NodeId node, std::uint64_t draw) const {
  return unit_from_hash(hash_key({seed, pass, cycle, static_cast<std::uint64_t>(node), draw}));
}

double dissimilarity(std::span<const double> a, std::span<const double> b, Dissimilarity kind) {
  if (a.size() != b.size()) throw std::invalid_argument("dissimilarity: dimension mismatch");
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    acc += kind == Dissimilarity::L1 ? std::abs(d) : d * d;
  }
  return kind == Dissimilarity::L1 ? acc : std::sqrt(acc);
}

std::size_t candidate_budget(double kappa_upper, std::size_t degree) {
  const double x = kappa_upper * static_cast<double>(degree);
  return std::min(degree, static_cast<std::size_t>(std::floor(x + kRoundingSlack)));
}

std::size_t retention_floor(double kappa_lower, std::size_t degree) {
  const double x = kappa_lower * static_cast<double>(degree);
  return std::min(degree, static_cast<std::size_t>(std::max(0.0, std::ceil(x - kRoundingSlack))));
}

std::vector<NodeId> select_candidates(NodeId i, const Matrix& estimates, const Graph& g, const PruneParams& params,
                                      const PruneStream& stream) {
  const auto& nbrs = g.neighbors(i);
  const std::size_t budget = candidate_budget(params.upper(i), nbrs.size());
  if (budget == 0) return {};

  std::vector<double> delta(nbrs.size());
  for (std::size_t t = 0; t < nbrs.size(); ++t) delta[t] = row_dissimilarity(estimates, i, nbrs[t], params.dissimilarity);

  std::vector<NodeId> chosen;
  chosen.reserve(budget);

  if (params.beta.is_greedy()) {
    std::vector<std::size_t> order(nbrs.size());
    std::iota(order.begin(), order.end(), 0);
    // Neighbor lists are ascending, so a stable sort breaks ties by the smaller neighbor id.
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return delta[a] < delta[b]; });
    for (std::size_t t = 0; t < budget; ++t) chosen.push_back(nbrs[order[t]]);
  } else {
    const double beta = params.beta.value();
    std::vector<std::size_t> remaining(nbrs.size());
    std::iota(remaining.begin(), remaining.end(), 0);
    std::vector<double> weight;
    for (std::size_t draw = 0; draw < budget; ++draw) {
      double lowest = std::numeric_limits<double>::infinity();
      for (std::size_t t : remaining) lowest = std::min(lowest, beta * delta[t]);
      weight.assign(remaining.size(), 0.0);
      double total = 0.0;
      for (std::size_t r = 0; r < remaining.size(); ++r) {
        const double shifted = beta * delta[remaining[r]] - lowest;
        weight[r] = shifted > kMaxExponent ? 0.0 : std::exp(-shifted);
        total += weight[r];
      }
      const double target = stream.uniform(i, draw) * total;
      std::size_t pick = remaining.size();
      double acc = 0.0;
      for (std::size_t r = 0; r < remaining.size(); ++r) {
        if (weight[r] == 0.0) continue;
        acc += weight[r];
        pick = r;
        if (target < acc) break;
      }
      chosen.push_back(nbrs[remaining[pick]]);
      remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(pick));
    }
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

PruneOutcome execute_pruning(const Graph& g, const Matrix& estimates, const PruneParams& params, const PruneStream& stream) {
  const std::size_t n = g.size();
  params.validate(n);
  if (static_cast<std::size_t>(estimates.rows()) != n) throw std::invalid_argument("execute_pruning: one estimate row per node required");

  PruneOutcome out;
  out.candidates.resize(n);
  std::vector<std::uint8_t> selected(n * n, 0);
  for (NodeId i = 0; i < n; ++i) {
    out.candidates[i] = select_candidates(i, estimates, g, params, stream);
    for (NodeId j : out.candidates[i]) selected[i * n + j] = 1;
  }

  // kept[i*n+j]: (i,j) still in node i's edge set.
  std::vector<std::uint8_t> kept(n * n, 0);
  for (NodeId i = 0; i < n; ++i) {
    const auto& nbrs = g.neighbors(i);
    for (NodeId j : nbrs) kept[i * n + j] = 1;

    // Step (i): own candidates are always dropped.
    for (NodeId j : out.candidates[i]) kept[i * n + j] = 0;
    std::size_t remaining = nbrs.size() - out.candidates[i].size();

    // Step (ii): other nodes' requests, ascending requester id, guarded by the retention floor.
    const std::size_t floor_i = retention_floor(params.lower(i), nbrs.size());
    for (NodeId j : nbrs) {
      if (!selected[j * n + i] || selected[i * n + j]) continue;
      if (remaining > floor_i) {
        kept[i * n + j] = 0;
        --remaining;
      }
    }
  }

  out.pruned_graph = Graph(n);
  for (const auto& [i, j] : g.edges()) {
    const bool a = kept[i * n + j] != 0;
    const bool b = kept[j * n + i] != 0;
    const bool keep = params.symmetrization == Symmetrization::Add ? (a || b) : (a && b);
    if (keep) out.pruned_graph.add_edge(i, j);
  }
  out.removed_count = g.edge_count() - out.pruned_graph.edge_count();
  return out;
}

void write_prune_outcome_json(std::ostream& out, const PruneOutcome& outcome) {
  nlohmann::json j;
  j["n"] = outcome.pruned_graph.size();
  j["removed_count"] = outcome.removed_count;
  j["candidates"] = outcome.candidates;
  auto& nodes = j["neighbors"] = nlohmann::json::array();
  for (NodeId i = 0; i < outcome.pruned_graph.size(); ++i) nodes.push_back(outcome.pruned_graph.neighbors(i));
  out << j.dump(2) << '\n';
}

}  // namespace adcons
