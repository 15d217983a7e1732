#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <sstream>
#include <vector>

#include <Eigen/Eigenvalues>

#include "adcons/graph.hpp"
#include "adcons/linalg.hpp"
#include "adcons/mixing.hpp"
#include "doctest.h"

using namespace adcons;

namespace {

Matrix path3_mh() {
  Matrix m(3, 3);
  m << 2.0 / 3, 1.0 / 3, 0, 1.0 / 3, 1.0 / 3, 1.0 / 3, 0, 1.0 / 3, 2.0 / 3;
  return m;
}

Matrix random_stochastic(std::size_t n, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::bernoulli_distribution sparse(0.4);
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) m(i, j) = sparse(gen) ? 0.0 : u(gen);
    m(i, i) += 1e-3;
    m.row(i) /= m.row(i).sum();
  }
  return m;
}

// Real roots of the characteristic cubic of a symmetric 3x3, trigonometric form.
std::vector<double> cubic_eigs(const Matrix& a) {
  const double p1 = a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) + a(1, 2) * a(1, 2);
  const double q = a.trace() / 3;
  const double p2 = std::pow(a(0, 0) - q, 2) + std::pow(a(1, 1) - q, 2) + std::pow(a(2, 2) - q, 2) + 2 * p1;
  const double p = std::sqrt(p2 / 6);
  Matrix b = (a - q * Matrix::Identity(3, 3)) / p;
  const double r = std::clamp(b.determinant() / 2, -1.0, 1.0);
  const double phi = std::acos(r) / 3;
  const double pi = std::acos(-1.0);
  double e1 = q + 2 * p * std::cos(phi);
  double e3 = q + 2 * p * std::cos(phi + 2 * pi / 3);
  double e2 = 3 * q - e1 - e3;
  return {e1, e2, e3};
}

}  // namespace

TEST_CASE("metropolis_hastings hand values") {
  Graph g2(2);
  g2.add_edge(0, 1);
  CHECK(metropolis_hastings(g2).weights().isApprox(Matrix::Constant(2, 2, 0.5), 1e-15));

  for (std::size_t n : {3, 5, 8}) {
    Matrix w = metropolis_hastings(Graph::complete(n)).weights();
    CHECK((w.array() - 1.0 / n).abs().maxCoeff() < 1e-15);
  }

  Matrix p = metropolis_hastings(Graph::path(3)).weights();
  CHECK((p - path3_mh()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("metropolis_hastings invariants on random graphs") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Graph g = erdos_renyi(16, 0.3, seed);
    MixingMatrix m = metropolis_hastings(g);
    CHECK(is_symmetric(m.weights()));
    CHECK(is_doubly_stochastic(m.weights()));
    CHECK((m.weights().array() >= 0).all());
    for (NodeId i = 0; i < 16; ++i)
      for (NodeId j = 0; j < 16; ++j)
        if (i != j) CHECK((m(i, j) > 0) == g.has_edge(i, j));
    if (g.edge_count() > 0) CHECK(m.min_positive_entry() >= 1.0 / (1.0 + g.max_degree()) - 1e-15);
  }
}

TEST_CASE("MixingMatrix rejects non stochastic input") {
  Matrix m = Matrix::Identity(3, 3);
  m(0, 0) = 0.9;
  CHECK_THROWS_AS(MixingMatrix{m}, std::invalid_argument);
}

TEST_CASE("spectral gap examples") {
  CHECK(spectral_gap(Matrix::Identity(4, 4)) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(std::abs(spectral_gap(Matrix::Constant(5, 5, 0.2)) - 1.0) < 1e-12);
  CHECK(std::abs(spectral_gap(path3_mh()) - 1.0 / 3) < 1e-12);
  Matrix asym = path3_mh();
  asym(0, 1) += 0.1;
  CHECK_THROWS(spectral_gap(asym));
}

TEST_CASE("ergodicity and row dissimilarity examples") {
  CHECK(std::abs(ergodicity_coefficient(Matrix::Identity(3, 3)) - 1.0) < 1e-12);
  CHECK(std::abs(ergodicity_coefficient(Matrix::Constant(4, 4, 0.25))) < 1e-12);
  CHECK(std::abs(ergodicity_coefficient(path3_mh()) - 2.0 / 3) < 1e-12);

  CHECK(std::abs(row_dissimilarity(Matrix::Constant(4, 4, 0.25))) < 1e-12);
  CHECK(std::abs(row_dissimilarity(Matrix::Identity(3, 3)) - 1.0) < 1e-12);
  CHECK(std::abs(row_dissimilarity(path3_mh()) - 2.0 / 3) < 1e-12);
}

TEST_CASE("ergodicity bounds on random stochastic pairs") {
  std::mt19937_64 gen(11);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 2 + t % 6;
    Matrix a = random_stochastic(n, gen), b = random_stochastic(n, gen);
    CHECK(row_dissimilarity(a) <= ergodicity_coefficient(a) + 1e-12);
    CHECK(ergodicity_coefficient(a * b) <= ergodicity_coefficient(a) * ergodicity_coefficient(b) + 1e-12);
  }
}

TEST_CASE("product_range") {
  std::vector<MixingMatrix> seq{MixingMatrix(path3_mh()), MixingMatrix(path3_mh())};
  CHECK(product_range(seq, 1, 1).isApprox(Matrix::Identity(3, 3)));
  CHECK(std::abs(product_range(seq, 0, 2)(0, 0) - 5.0 / 9) < 1e-15);
  std::vector<MixingMatrix> avg{MixingMatrix(Matrix::Constant(3, 3, 1.0 / 3)), MixingMatrix(Matrix::Constant(3, 3, 1.0 / 3))};
  CHECK((product_range(avg, 0, 2).array() - 1.0 / 3).abs().maxCoeff() < 1e-15);

  // Order: Q[0:2] = Q_1 Q_0.
  Graph g(3);
  g.add_edge(0, 1);
  std::vector<MixingMatrix> mixed{metropolis_hastings(g), MixingMatrix(path3_mh())};
  CHECK(product_range(mixed, 0, 2).isApprox(path3_mh() * mixed[0].weights()));
  CHECK_THROWS(product_range(mixed, 1, 3));
}

TEST_CASE("deviation_norm examples") {
  CHECK(std::abs(deviation_norm(Matrix::Constant(4, 4, 0.25))) < 1e-12);
  CHECK(std::abs(deviation_norm(Matrix::Identity(2, 2)) - 1.0) < 1e-12);
  CHECK(std::abs(deviation_norm(path3_mh()) - 2.0 / 3) < 1e-10);
}

TEST_CASE("Jacobi eigenvalues against Eigen") {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> z;
  for (int t = 0; t < 20; ++t) {
    const int n = 2 + t % 9;
    Matrix a(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = z(gen);
    a = (a + a.transpose()).eval();
    Vector mine = symmetric_eigenvalues(a);
    Eigen::SelfAdjointEigenSolver<Matrix> es(a);
    Vector ref = es.eigenvalues().reverse();
    CHECK((mine - ref).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("Jacobi eigenvalues against the characteristic cubic") {
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int t = 0; t < 20; ++t) {
    Matrix a(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = i; j < 3; ++j) a(i, j) = a(j, i) = u(gen);
    Vector mine = symmetric_eigenvalues(a);
    auto ref = cubic_eigs(a);
    std::sort(ref.rbegin(), ref.rend());
    for (int i = 0; i < 3; ++i) CHECK(std::abs(mine(i) - ref[i]) < 1e-10);
  }
  Vector p = symmetric_eigenvalues(path3_mh());
  CHECK(std::abs(p(0) - 1.0) < 1e-12);
  CHECK(std::abs(p(1) - 2.0 / 3) < 1e-12);
  CHECK(std::abs(p(2)) < 1e-12);
}

TEST_CASE("spectral_norm against singular values") {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> z;
  for (int t = 0; t < 10; ++t) {
    Matrix a(6, 4);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 4; ++j) a(i, j) = z(gen);
    Eigen::JacobiSVD<Matrix> svd(a);
    CHECK(std::abs(spectral_norm(a) - svd.singularValues()(0)) < 1e-7 * svd.singularValues()(0));
  }
  // all-ones in the null space triggers the restart path
  Matrix m = path3_mh() - Matrix::Constant(3, 3, 1.0 / 3);
  CHECK(std::abs(spectral_norm(m) - 2.0 / 3) < 1e-8);
}

TEST_CASE("spectral_report and matrix csv") {
  SpectralReport r = spectral_report(metropolis_hastings(Graph::path(3)));
  CHECK(std::abs(r.spectral_gap - 1.0 / 3) < 1e-12);
  CHECK(std::abs(r.ergodicity - 2.0 / 3) < 1e-12);
  CHECK(std::abs(r.row_dissimilarity - 2.0 / 3) < 1e-12);
  CHECK(std::abs(r.min_positive_entry - 1.0 / 3) < 1e-15);

  std::ostringstream out;
  write_matrix_csv(out, path3_mh());
  std::istringstream in(out.str());
  CHECK(read_matrix_csv(in) == path3_mh());
}
