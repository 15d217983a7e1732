#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>

#include "adcons/graph.hpp"
#include "adcons/linalg.hpp"

namespace adcons {

/// Absolute tolerance on every row and column sum of a doubly stochastic matrix.
inline constexpr double kStochasticTol = 1e-12;

/// Dense n x n doubly stochastic weight matrix. Construction validates the
/// row and column sums and throws std::invalid_argument on violation.
class MixingMatrix {
 public:
  MixingMatrix() = default;
  explicit MixingMatrix(Matrix weights);

  std::size_t size() const { return static_cast<std::size_t>(weights_.rows()); }
  const Matrix& weights() const { return weights_; }
  double operator()(std::size_t i, std::size_t j) const { return weights_(i, j); }

  /// Smallest strictly positive entry (q).
  double min_positive_entry() const;

 private:
  Matrix weights_;
};

struct SpectralReport {
  double spectral_gap = 0.0;        // sigma
  double ergodicity = 0.0;          // rho
  double row_dissimilarity = 0.0;   // delta
  double min_positive_entry = 0.0;  // q
};

/// q_ij = 1 / (1 + max(deg i, deg j)) on edges, diagonal takes the remainder.
MixingMatrix metropolis_hastings(const Graph& g);

/// 1 - max(|lambda_2|, |lambda_n|). Disconnected graphs give 0 (lambda_2 = 1).
/// Throws for non-symmetric input.
double spectral_gap(const Matrix& m);
inline double spectral_gap(const MixingMatrix& m) { return spectral_gap(m.weights()); }

/// Coefficient of ergodicity: 1 - min over row pairs of sum_j min(q_i1j, q_i2j).
/// Requires rows summing to 1 (within kStochasticTol * n).
double ergodicity_coefficient(const Matrix& m);

/// max_j max_{i1,i2} |q_i1j - q_i2j|.
double row_dissimilarity(const Matrix& m);

/// Q[r:s] = Q_{s-1} * ... * Q_r; Q[s:s] is the identity.
Matrix product_range(std::span<const MixingMatrix> seq, std::size_t r, std::size_t s);

/// Spectral norm of m - (1/n) 11^T.
double deviation_norm(const Matrix& m);

SpectralReport spectral_report(const MixingMatrix& m);

bool is_row_stochastic(const Matrix& m, double tol = kStochasticTol);
bool is_doubly_stochastic(const Matrix& m, double tol = kStochasticTol);

// CSV dump: n rows of n comma-separated values, 17 significant digits.
void write_matrix_csv(std::ostream& out, const Matrix& m);
Matrix read_matrix_csv(std::istream& in);

}  // namespace adcons
