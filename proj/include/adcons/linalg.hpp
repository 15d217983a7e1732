#pragma once

#include <cstdint>

#include <Eigen/Dense>

namespace adcons {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct JacobiOptions {
  double off_diagonal_tol = 1e-12;  // Frobenius norm of the off-diagonal part
  int max_sweeps = 100;
};

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, sorted
/// descending. Throws std::invalid_argument for non-square or non-symmetric
/// input (tolerance 1e-12, absolute).
Vector symmetric_eigenvalues(const Matrix& a, const JacobiOptions& opts = {});

struct PowerIterationOptions {
  int max_iters = 10000;
  double rel_tol = 1e-10;
  std::uint64_t fallback_seed = 0x5eed;
};

/// Largest singular value of `m` via power iteration on m^T m.
///
/// Starts from the all-ones vector. If the iterate collapses (all-ones lies
/// in the null space, e.g. for M - 11^T/n with M stochastic) it restarts
/// from a seeded Gaussian vector.
double spectral_norm(const Matrix& m, const PowerIterationOptions& opts = {});

bool is_symmetric(const Matrix& a, double tol = 1e-12);

}  // namespace adcons
