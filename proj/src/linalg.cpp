#include "adcons/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>

namespace adcons {

bool is_symmetric(const Matrix& a, double tol) {
  if (a.rows() != a.cols()) return false;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = i + 1; j < a.cols(); ++j)
      if (std::abs(a(i, j) - a(j, i)) > tol) return false;
  return true;
}

namespace {

double off_diagonal_norm(const Matrix& a) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

}  // namespace

Vector symmetric_eigenvalues(const Matrix& input, const JacobiOptions& opts) {
  if (input.rows() != input.cols()) throw std::invalid_argument("symmetric_eigenvalues: matrix is not square");
  if (!is_symmetric(input)) throw std::invalid_argument("symmetric_eigenvalues: matrix is not symmetric");

  Matrix a = input;
  const Eigen::Index n = a.rows();
  for (int sweep = 0; sweep < opts.max_sweeps && off_diagonal_norm(a) > opts.off_diagonal_tol; ++sweep) {
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // Rotation angle zeroing a(p,q): tan(2t) = 2 a_pq / (a_qq - a_pp), smaller root.
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
      }
    }
  }

  Vector eig = a.diagonal();
  std::sort(eig.data(), eig.data() + eig.size(), std::greater<>());
  return eig;
}

double spectral_norm(const Matrix& m, const PowerIterationOptions& opts) {
  if (m.size() == 0) return 0.0;
  const Matrix gram = m.transpose() * m;
  const double scale = gram.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;

  auto run = [&](Vector v) -> double {
    double estimate = 0.0;
    for (int it = 0; it < opts.max_iters; ++it) {
      const double norm = v.norm();
      if (norm <= 1e-14 * scale * std::sqrt(static_cast<double>(v.size()))) return -1.0;  // stagnated
      v /= norm;
      Vector w = gram * v;
      const double next = v.dot(w);
      if (it > 0 && std::abs(next - estimate) <= opts.rel_tol * std::abs(next)) return next;
      estimate = next;
      v = std::move(w);
    }
    return estimate;
  };

  double lambda = run(Vector::Ones(m.cols()));
  if (lambda < 0.0) {
    std::mt19937_64 rng(opts.fallback_seed);
    std::normal_distribution<double> normal;
    Vector v(m.cols());
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = normal(rng);
    lambda = run(std::move(v));
    if (lambda < 0.0) return 0.0;
  }
  return std::sqrt(std::max(lambda, 0.0));
}

}  // namespace adcons
