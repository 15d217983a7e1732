#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "adcons/algorithms.hpp"
#include "adcons/linalg.hpp"

namespace adcons {

struct Dataset {
  Matrix features;  // N x d
  Vector labels;    // N

  std::size_t samples() const { return static_cast<std::size_t>(features.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(features.cols()); }
};

enum class ProblemKind { Linear, Logistic };

using Partition = std::vector<std::vector<std::size_t>>;

struct ObjectiveSpec {
  ProblemKind kind = ProblemKind::Linear;
  Partition partitions;
  double lambda = 0.0;
  double L = 0.0;
  double mu = 0.0;
};

/// Gaussian design, Gaussian ground truth, b = A x_true + sigma * noise.
struct SyntheticLinear {
  Dataset data;
  Vector x_true;
};
SyntheticLinear gen_linear_synthetic(std::size_t samples, std::size_t dim, double noise_sigma, std::uint64_t seed);

/// Seeded shuffle of [0, N) cut into n contiguous blocks; the first N mod n
/// blocks get the extra element.
Partition partition_uniform(std::size_t samples, std::size_t nodes, std::uint64_t seed);

double sigmoid(double z);

/// Local objective f_i on node i's shard D_i:
///   Linear:   (1/|D_i|) sum (a^T x - b)^2 + lambda ||x||^2
///   Logistic: (1/|D_i|) sum logloss(a^T x, b) + (lambda/2) ||x||^2
double local_value(const ObjectiveSpec& spec, const Dataset& data, std::size_t node, const Vector& x);
Vector local_gradient(const ObjectiveSpec& spec, const Dataset& data, std::size_t node, const Vector& x);
Matrix local_hessian(const ObjectiveSpec& spec, const Dataset& data, std::size_t node, const Vector& x);

/// Network objective (1/n) sum_i f_i(x), the function the decentralized
/// methods minimize. Equals the pooled (1/N) form under equal shards.
double network_value(const ObjectiveSpec& spec, const Dataset& data, const Vector& x);
Vector network_gradient(const ObjectiveSpec& spec, const Dataset& data, const Vector& x);

/// Pooled objective over all N samples; its gradient is
/// sum_i (|D_i| / N) grad f_i.
double pooled_value(const ObjectiveSpec& spec, const Dataset& data, const Vector& x);
Vector pooled_gradient(const ObjectiveSpec& spec, const Dataset& data, const Vector& x);

struct ReferenceSolution {
  Vector x_star;
  double f_star = 0.0;
  int newton_iterations = 0;
};

/// Minimizer of network_value. Linear: normal equations through a Cholesky
/// factorization. Logistic: damped Newton to ||grad|| <= 1e-12 (200 iterations
/// max). Throws std::runtime_error when singular or not converged.
ReferenceSolution solve_reference(const ObjectiveSpec& spec, const Dataset& data);

struct SmoothnessConstants {
  double L = 0.0;             // global
  double mu = 0.0;            // global
  double L_local_max = 0.0;   // max over nodes
  double mu_local_min = 0.0;  // min over nodes
};
SmoothnessConstants smoothness_constants(const ObjectiveSpec& spec, const Dataset& data);

/// Numeric CSV with a header row. With `normalize`, every feature column is
/// standardized to mean 0 and (population) variance 1; constant columns are
/// only centered. `require_binary_labels` rejects labels outside {0, 1}.
Dataset load_csv_dataset(const std::string& path, const std::string& label_column, bool normalize,
                         bool require_binary_labels = false);
Dataset parse_csv_dataset(const std::string& text, const std::string& label_column, bool normalize,
                          bool require_binary_labels = false);

/// Builds the spec (partition + constants) for a dataset.
ObjectiveSpec make_objective_spec(ProblemKind kind, const Dataset& data, std::size_t nodes, double lambda,
                                  std::uint64_t seed);

/// Objective adapter for the gradient-tracking engines.
class RegressionObjective final : public Objective {
 public:
  RegressionObjective(ObjectiveSpec spec, Dataset data);

  std::size_t nodes() const override { return spec_.partitions.size(); }
  std::size_t dim() const override { return data_.dim(); }
  Vector local_gradient(std::size_t i, const Vector& x) const override;
  double value(const Vector& x) const override;
  double optimal_value() const override { return reference_.f_star; }

  const ObjectiveSpec& spec() const { return spec_; }
  const Dataset& data() const { return data_; }
  const ReferenceSolution& reference() const { return reference_; }

 private:
  ObjectiveSpec spec_;
  Dataset data_;
  ReferenceSolution reference_;
  std::vector<Matrix> shard_features_;
  std::vector<Vector> shard_labels_;
};

/// f_i(x) = (w_i / 2) ||x - c_i||^2. Closed-form minimizer; used for checks.
class QuadraticObjective final : public Objective {
 public:
  QuadraticObjective(Matrix centers, Vector weights);
  explicit QuadraticObjective(Matrix centers);

  std::size_t nodes() const override { return static_cast<std::size_t>(centers_.rows()); }
  std::size_t dim() const override { return static_cast<std::size_t>(centers_.cols()); }
  Vector local_gradient(std::size_t i, const Vector& x) const override;
  double value(const Vector& x) const override;
  double optimal_value() const override { return f_star_; }
  const Vector& minimizer() const { return x_star_; }

 private:
  Matrix centers_;
  Vector weights_;
  Vector x_star_;
  double f_star_ = 0.0;
};

ProblemKind problem_kind_from_string(const std::string& s);

}  // namespace adcons
