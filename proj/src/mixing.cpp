#include "adcons/mixing.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace adcons {

bool is_row_stochastic(const Matrix& m, double tol) {
  if (m.rows() != m.cols() || m.minCoeff() < 0.0) return false;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    if (std::abs(m.row(i).sum() - 1.0) > tol) return false;
  return true;
}

bool is_doubly_stochastic(const Matrix& m, double tol) {
  if (!is_row_stochastic(m, tol)) return false;
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    if (std::abs(m.col(j).sum() - 1.0) > tol) return false;
  return true;
}

MixingMatrix::MixingMatrix(Matrix weights) : weights_(std::move(weights)) {
  if (!is_doubly_stochastic(weights_)) throw std::invalid_argument("mixing matrix is not doubly stochastic within 1e-12");
}

double MixingMatrix::min_positive_entry() const {
  double q = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < weights_.size(); ++i) {
    const double w = weights_.data()[i];
    if (w > 0.0) q = std::min(q, w);
  }
  return q;
}

MixingMatrix metropolis_hastings(const Graph& g) {
  const std::size_t n = g.size();
  Matrix q = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (NodeId i = 0; i < n; ++i) {
    double off = 0.0;
    for (NodeId j : g.neighbors(i)) {
      const double w = 1.0 / (1.0 + static_cast<double>(std::max(g.degree(i), g.degree(j))));
      q(i, j) = w;
      off += w;
    }
    q(i, i) = 1.0 - off;
  }
  return MixingMatrix(std::move(q));
}

double spectral_gap(const Matrix& m) {
  if (!is_symmetric(m)) throw std::invalid_argument("spectral_gap: matrix is not symmetric");
  if (m.rows() < 2) return 1.0;
  const Vector eig = symmetric_eigenvalues(m);
  const double second = std::max(std::abs(eig(1)), std::abs(eig(eig.size() - 1)));
  return std::clamp(1.0 - second, 0.0, 1.0);
}

double ergodicity_coefficient(const Matrix& m) {
  const double tol = kStochasticTol * std::max<double>(1.0, static_cast<double>(m.cols()));
  if (!is_row_stochastic(m, tol)) throw std::invalid_argument("ergodicity_coefficient: rows must be stochastic");
  const Eigen::Index n = m.rows();
  double min_overlap = 1.0;
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = a + 1; b < n; ++b)
      min_overlap = std::min(min_overlap, m.row(a).cwiseMin(m.row(b)).sum());
  return std::clamp(1.0 - min_overlap, 0.0, 1.0);
}

double row_dissimilarity(const Matrix& m) {
  if (m.rows() == 0) return 0.0;
  return (m.colwise().maxCoeff() - m.colwise().minCoeff()).maxCoeff();
}

Matrix product_range(std::span<const MixingMatrix> seq, std::size_t r, std::size_t s) {
  if (r > s || s > seq.size()) throw std::out_of_range("product_range: need 0 <= r <= s <= length");
  const Eigen::Index n = seq.empty() ? 0 : static_cast<Eigen::Index>(seq.front().size());
  Matrix out = Matrix::Identity(n, n);
  for (std::size_t k = r; k < s; ++k) out = seq[k].weights() * out;
  return out;
}

double deviation_norm(const Matrix& m) {
  const Eigen::Index n = m.rows();
  if (n == 0) return 0.0;
  const Matrix dev = m - Matrix::Constant(n, m.cols(), 1.0 / static_cast<double>(n));
  return spectral_norm(dev);
}

SpectralReport spectral_report(const MixingMatrix& m) {
  return SpectralReport{
      .spectral_gap = spectral_gap(m),
      .ergodicity = ergodicity_coefficient(m.weights()),
      .row_dissimilarity = row_dissimilarity(m.weights()),
      .min_positive_entry = m.min_positive_entry(),
  };
}

void write_matrix_csv(std::ostream& out, const Matrix& m) {
  char buf[32];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
      if (j) out << ',';
      out << buf;
    }
    out << '\n';
  }
}

Matrix read_matrix_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      std::size_t used = 0;
      const double v = std::stod(cell, &used);
      if (used != cell.size()) throw std::runtime_error("matrix csv: bad field '" + cell + "'");
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  const auto n = static_cast<Eigen::Index>(rows.size());
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (static_cast<Eigen::Index>(rows[i].size()) != n) throw std::runtime_error("matrix csv: expected a square matrix");
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

}  // namespace adcons
