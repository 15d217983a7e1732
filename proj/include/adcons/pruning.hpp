#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "adcons/graph.hpp"
#include "adcons/linalg.hpp"

namespace adcons {

/// Softmax temperature. `Greedy` is beta = infinity: pick the least
/// dissimilar edges deterministically.
class Beta {
 public:
  constexpr Beta() = default;
  constexpr explicit Beta(double value) : value_(value) {}
  static constexpr Beta greedy() {
    Beta b;
    b.greedy_ = true;
    return b;
  }

  constexpr bool is_greedy() const { return greedy_; }
  constexpr double value() const { return value_; }

 private:
  double value_ = 0.0;
  bool greedy_ = false;
};

enum class Dissimilarity { L1, L2 };
enum class Symmetrization { Add, Remove };

struct PruneParams {
  // Per-node vectors, or a single value broadcast to all nodes.
  std::vector<double> kappa_upper{0.0};
  std::vector<double> kappa_lower{0.0};
  Beta beta{1.0};
  Dissimilarity dissimilarity = Dissimilarity::L1;
  Symmetrization symmetrization = Symmetrization::Add;

  static PruneParams uniform(double kappa_upper, double kappa_lower, Beta beta);

  double upper(NodeId i) const { return kappa_upper.size() == 1 ? kappa_upper[0] : kappa_upper.at(i); }
  double lower(NodeId i) const { return kappa_lower.size() == 1 ? kappa_lower[0] : kappa_lower.at(i); }

  /// Throws std::invalid_argument unless each fraction is in [0,1],
  /// kappa_lower_i <= 1 - kappa_upper_i, beta >= 0 and vector sizes are 1 or n.
  void validate(std::size_t n) const;
};

/// Identifies the random substream of one pruning pass. Every draw is a pure
/// function of (seed, pass, cycle, node, draw index), so node evaluation
/// order never changes the outcome.
struct PruneStream {
  std::uint64_t seed = 0;
  std::uint64_t cycle = 0;
  std::uint64_t pass = 0;  // 0 = x estimates, 1 = y estimates

  double uniform(NodeId node, std::uint64_t draw) const;
};

struct PruneOutcome {
  Graph pruned_graph;
  std::vector<std::vector<NodeId>> candidates;  // E_prune_i as neighbor ids, ascending
  std::size_t removed_count = 0;
};

double dissimilarity(std::span<const double> a, std::span<const double> b, Dissimilarity kind = Dissimilarity::L1);

/// floor(kappa * |E_i|), with a small guard so that products like 0.1 * 30
/// are not rounded down because of representation error.
std::size_t candidate_budget(double kappa_upper, std::size_t degree);
/// ceil(kappa_lower * |E_i|), same guard.
std::size_t retention_floor(double kappa_lower, std::size_t degree);

/// Candidate edges at node i: floor(kappa_i |E_i|) neighbors drawn without
/// replacement with probability proportional to exp(-beta * Delta(a_i, a_j)).
/// `estimates` holds one row per node.
std::vector<NodeId> select_candidates(NodeId i, const Matrix& estimates, const Graph& g, const PruneParams& params,
                                      const PruneStream& stream);

/// One full run of the pruning protocol on the reference graph `g`.
PruneOutcome execute_pruning(const Graph& g, const Matrix& estimates, const PruneParams& params, const PruneStream& stream);

/// Diagnostic JSON dump: per-node candidate lists and final neighbor sets.
void write_prune_outcome_json(std::ostream& out, const PruneOutcome& outcome);

}  // namespace adcons
