#include "adcons/metrics.hpp"

#include <stdexcept>

namespace adcons {

double avg_consensus_error(const Graph& reference, const Matrix& states) {
  if (static_cast<std::size_t>(states.rows()) != reference.size())
    throw std::invalid_argument("avg_consensus_error: one state row per node required");
  if (reference.edge_count() == 0) return 0.0;
  double total = 0.0;
  for (const auto& [i, j] : reference.edges())
    total += (states.row(static_cast<Eigen::Index>(i)) - states.row(static_cast<Eigen::Index>(j))).norm();
  return total / static_cast<double>(reference.edge_count());
}

Vector node_mean(const Matrix& states) { return states.colwise().mean().transpose(); }

double disagreement_norm(const Matrix& states) {
  return (states.rowwise() - states.colwise().mean()).norm();
}

}  // namespace adcons
