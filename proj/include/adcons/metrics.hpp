#pragma once

#include "adcons/graph.hpp"
#include "adcons/linalg.hpp"

namespace adcons {

/// (1/|E|) * sum over reference edges of ||x_i - x_j||_2; 0 for an edgeless graph.
/// `states` has one row per node.
double avg_consensus_error(const Graph& reference, const Matrix& states);

/// ||x - 1 xbar^T||_F over the stacked node states.
double disagreement_norm(const Matrix& states);

/// Node average as a column vector.
Vector node_mean(const Matrix& states);

}  // namespace adcons
