#include "adcons/problems.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include <Eigen/Cholesky>

namespace adcons {

namespace {

struct Shard {
  Matrix a;
  Vector b;
};

Shard make_shard(const Dataset& data, const std::vector<std::size_t>& idx) {
  Shard s{Matrix(static_cast<Eigen::Index>(idx.size()), data.features.cols()), Vector(static_cast<Eigen::Index>(idx.size()))};
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const auto row = static_cast<Eigen::Index>(idx[r]);
    s.a.row(static_cast<Eigen::Index>(r)) = data.features.row(row);
    s.b(static_cast<Eigen::Index>(r)) = data.labels(row);
  }
  return s;
}

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double shard_value(ProblemKind kind, double lambda, const Matrix& a, const Vector& b, const Vector& x) {
  const double m = static_cast<double>(a.rows());
  const Vector z = a * x;
  if (kind == ProblemKind::Linear) return (z - b).squaredNorm() / m + lambda * x.squaredNorm();
  double loss = 0.0;
  for (Eigen::Index r = 0; r < z.size(); ++r) loss += softplus(z(r)) - b(r) * z(r);
  return loss / m + 0.5 * lambda * x.squaredNorm();
}

Vector shard_gradient(ProblemKind kind, double lambda, const Matrix& a, const Vector& b, const Vector& x) {
  const double m = static_cast<double>(a.rows());
  const Vector z = a * x;
  if (kind == ProblemKind::Linear) return (2.0 / m) * (a.transpose() * (z - b)) + 2.0 * lambda * x;
  const Vector resid = z.unaryExpr([](double v) { return sigmoid(v); }) - b;
  return (a.transpose() * resid) / m + lambda * x;
}

Matrix shard_hessian(ProblemKind kind, double lambda, const Matrix& a, const Vector& x) {
  const double m = static_cast<double>(a.rows());
  const Eigen::Index d = a.cols();
  if (kind == ProblemKind::Linear) return (2.0 / m) * (a.transpose() * a) + 2.0 * lambda * Matrix::Identity(d, d);
  const Vector z = a * x;
  const Vector w = z.unaryExpr([](double v) {
    const double s = sigmoid(v);
    return s * (1.0 - s);
  });
  return (a.transpose() * w.asDiagonal() * a) / m + lambda * Matrix::Identity(d, d);
}

void check_node(const ObjectiveSpec& spec, std::size_t node) {
  if (node >= spec.partitions.size()) throw std::out_of_range("node index outside the partition");
  if (spec.partitions[node].empty()) throw std::invalid_argument("node " + std::to_string(node) + " owns no samples");
}

double max_eigenvalue(const Matrix& sym) { return symmetric_eigenvalues(sym)(0); }
double min_eigenvalue(const Matrix& sym) {
  const Vector e = symmetric_eigenvalues(sym);
  return e(e.size() - 1);
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

SyntheticLinear gen_linear_synthetic(std::size_t samples, std::size_t dim, double noise_sigma, std::uint64_t seed) {
  if (dim < 1 || samples < dim) throw std::invalid_argument("gen_linear_synthetic: need N >= d >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const auto N = static_cast<Eigen::Index>(samples), d = static_cast<Eigen::Index>(dim);

  SyntheticLinear out;
  out.x_true.resize(d);
  for (Eigen::Index j = 0; j < d; ++j) out.x_true(j) = normal(rng);
  out.data.features.resize(N, d);
  for (Eigen::Index i = 0; i < N; ++i)
    for (Eigen::Index j = 0; j < d; ++j) out.data.features(i, j) = normal(rng);
  out.data.labels = out.data.features * out.x_true;
  for (Eigen::Index i = 0; i < N; ++i) out.data.labels(i) += noise_sigma * normal(rng);
  return out;
}

Partition partition_uniform(std::size_t samples, std::size_t nodes, std::uint64_t seed) {
  if (nodes == 0 || samples < nodes) throw std::invalid_argument("partition_uniform: need N >= n >= 1");
  std::vector<std::size_t> idx(samples);
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);

  Partition parts(nodes);
  const std::size_t base = samples / nodes, extra = samples % nodes;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < nodes; ++i) {
    const std::size_t len = base + (i < extra ? 1 : 0);
    parts[i].assign(idx.begin() + static_cast<std::ptrdiff_t>(pos), idx.begin() + static_cast<std::ptrdiff_t>(pos + len));
    pos += len;
  }
  return parts;
}

double local_value(const ObjectiveSpec& spec, const Dataset& data, std::size_t node, const Vector& x) {
  check_node(spec, node);
  const Shard s = make_shard(data, spec.partitions[node]);
  return shard_value(spec.kind, spec.lambda, s.a, s.b, x);
}

Vector local_gradient(const ObjectiveSpec& spec, const Dataset& data, std::size_t node, const Vector& x) {
  check_node(spec, node);
  const Shard s = make_shard(data, spec.partitions[node]);
  return shard_gradient(spec.kind, spec.lambda, s.a, s.b, x);
}

Matrix local_hessian(const ObjectiveSpec& spec, const Dataset& data, std::size_t node, const Vector& x) {
  check_node(spec, node);
  const Shard s = make_shard(data, spec.partitions[node]);
  return shard_hessian(spec.kind, spec.lambda, s.a, x);
}

double network_value(const ObjectiveSpec& spec, const Dataset& data, const Vector& x) {
  double acc = 0.0;
  for (std::size_t i = 0; i < spec.partitions.size(); ++i) acc += local_value(spec, data, i, x);
  return acc / static_cast<double>(spec.partitions.size());
}

Vector network_gradient(const ObjectiveSpec& spec, const Dataset& data, const Vector& x) {
  Vector acc = Vector::Zero(x.size());
  for (std::size_t i = 0; i < spec.partitions.size(); ++i) acc += local_gradient(spec, data, i, x);
  return acc / static_cast<double>(spec.partitions.size());
}

double pooled_value(const ObjectiveSpec& spec, const Dataset& data, const Vector& x) {
  return shard_value(spec.kind, spec.lambda, data.features, data.labels, x);
}

Vector pooled_gradient(const ObjectiveSpec& spec, const Dataset& data, const Vector& x) {
  return shard_gradient(spec.kind, spec.lambda, data.features, data.labels, x);
}

ReferenceSolution solve_reference(const ObjectiveSpec& spec, const Dataset& data) {
  const auto d = static_cast<Eigen::Index>(data.dim());
  const double n = static_cast<double>(spec.partitions.size());
  std::vector<Shard> shards;
  for (const auto& part : spec.partitions) {
    if (part.empty()) throw std::invalid_argument("solve_reference: empty shard");
    shards.push_back(make_shard(data, part));
  }
  auto value = [&](const Vector& x) {
    double v = 0.0;
    for (const auto& s : shards) v += shard_value(spec.kind, spec.lambda, s.a, s.b, x);
    return v / n;
  };
  auto gradient = [&](const Vector& x) {
    Vector g = Vector::Zero(d);
    for (const auto& s : shards) g += shard_gradient(spec.kind, spec.lambda, s.a, s.b, x);
    return Vector(g / n);
  };
  auto hessian = [&](const Vector& x) {
    Matrix h = Matrix::Zero(d, d);
    for (const auto& s : shards) h += shard_hessian(spec.kind, spec.lambda, s.a, x);
    return Matrix(h / n);
  };

  ReferenceSolution out;
  Vector x = Vector::Zero(d);

  if (spec.kind == ProblemKind::Linear) {
    const Eigen::LLT<Matrix> llt(hessian(x));
    if (llt.info() != Eigen::Success) throw std::runtime_error("solve_reference: normal equations are singular");
    x = llt.solve(-gradient(x));
    x -= llt.solve(gradient(x));  // one refinement step
    out.x_star = x;
    out.f_star = value(x);
    return out;
  }

  if (!(spec.lambda > 0.0)) throw std::invalid_argument("solve_reference: logistic regression needs lambda > 0");
  constexpr int kMaxNewton = 200;
  constexpr double kGradTol = 1e-12;
  double fx = value(x);
  Vector g = gradient(x);
  int it = 0;
  for (; it < kMaxNewton && g.norm() > kGradTol; ++it) {
    const Eigen::LLT<Matrix> llt(hessian(x));
    if (llt.info() != Eigen::Success) throw std::runtime_error("solve_reference: Hessian not positive definite");
    const Vector step = llt.solve(g);
    double t = 1.0;
    Vector trial = x - step;
    double ft = value(trial);
    int halvings = 0;
    while (ft > fx && halvings < 60) {
      t *= 0.5;
      trial = x - t * step;
      ft = value(trial);
      ++halvings;
    }
    if (ft > fx) break;  // no further decrease is representable
    x = std::move(trial);
    fx = ft;
    g = gradient(x);
  }
  if (g.norm() > kGradTol) {
    // Near the optimum the line search can stall on rounding; one full Newton
    // step from there is the best available refinement.
    const Eigen::LLT<Matrix> llt(hessian(x));
    const Vector refined = x - llt.solve(g);
    if (gradient(refined).norm() < g.norm()) {
      x = refined;
      g = gradient(x);
    }
  }
  if (g.norm() > kGradTol)
    throw std::runtime_error("solve_reference: Newton did not reach gradient norm 1e-12 (got " + std::to_string(g.norm()) + ")");
  out.x_star = x;
  out.f_star = value(x);
  out.newton_iterations = it;
  return out;
}

SmoothnessConstants smoothness_constants(const ObjectiveSpec& spec, const Dataset& data) {
  SmoothnessConstants c;
  const double N = static_cast<double>(data.samples());
  const Matrix gram = data.features.transpose() * data.features;
  if (spec.kind == ProblemKind::Linear) {
    c.L = 2.0 * max_eigenvalue(gram / N) + 2.0 * spec.lambda;
    c.mu = std::max(0.0, 2.0 * min_eigenvalue(gram / N)) + 2.0 * spec.lambda;
  } else {
    c.L = max_eigenvalue(gram) / (4.0 * N) + spec.lambda;
    c.mu = spec.lambda;
  }
  c.L_local_max = 0.0;
  c.mu_local_min = std::numeric_limits<double>::infinity();
  for (const auto& part : spec.partitions) {
    if (part.empty()) continue;
    const Shard s = make_shard(data, part);
    const double m = static_cast<double>(part.size());
    const Matrix g = s.a.transpose() * s.a;
    if (spec.kind == ProblemKind::Linear) {
      c.L_local_max = std::max(c.L_local_max, 2.0 * max_eigenvalue(g / m) + 2.0 * spec.lambda);
      c.mu_local_min = std::min(c.mu_local_min, std::max(0.0, 2.0 * min_eigenvalue(g / m)) + 2.0 * spec.lambda);
    } else {
      c.L_local_max = std::max(c.L_local_max, max_eigenvalue(g) / (4.0 * m) + spec.lambda);
      c.mu_local_min = std::min(c.mu_local_min, spec.lambda);
    }
  }
  if (spec.partitions.empty()) {
    c.L_local_max = c.L;
    c.mu_local_min = c.mu;
  }
  return c;
}

Dataset parse_csv_dataset(const std::string& text, const std::string& label_column, bool normalize,
                          bool require_binary_labels) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("csv: empty input");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const auto header = split_csv_line(line);
  const auto label_it = std::find(header.begin(), header.end(), label_column);
  if (label_it == header.end()) throw std::runtime_error("csv: no column named '" + label_column + "'");
  const auto label_idx = static_cast<std::size_t>(label_it - header.begin());

  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw std::runtime_error("csv: line " + std::to_string(lineno) + " has " + std::to_string(cells.size()) +
                               " fields, expected " + std::to_string(header.size()));
    std::vector<double> row;
    for (const auto& cell : cells) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (cell.empty() || used != cell.size() || !std::isfinite(v))
        throw std::runtime_error("csv: line " + std::to_string(lineno) + ": non-numeric field '" + cell + "'");
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("csv: no data rows");

  Dataset ds;
  const auto N = static_cast<Eigen::Index>(rows.size());
  const auto d = static_cast<Eigen::Index>(header.size() - 1);
  ds.features.resize(N, d);
  ds.labels.resize(N);
  for (Eigen::Index i = 0; i < N; ++i) {
    Eigen::Index col = 0;
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c == label_idx) ds.labels(i) = rows[static_cast<std::size_t>(i)][c];
      else ds.features(i, col++) = rows[static_cast<std::size_t>(i)][c];
    }
  }
  if (require_binary_labels) {
    for (Eigen::Index i = 0; i < N; ++i)
      if (ds.labels(i) != 0.0 && ds.labels(i) != 1.0)
        throw std::runtime_error("csv: label on data row " + std::to_string(i + 1) + " is not 0 or 1");
  }
  if (normalize) {
    for (Eigen::Index j = 0; j < d; ++j) {
      auto col = ds.features.col(j);
      const double mean = col.mean();
      col.array() -= mean;
      const double sd = std::sqrt(col.squaredNorm() / static_cast<double>(N));
      if (sd > 0.0) col /= sd;
    }
  }
  return ds;
}

Dataset load_csv_dataset(const std::string& path, const std::string& label_column, bool normalize,
                         bool require_binary_labels) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_csv_dataset(buf.str(), label_column, normalize, require_binary_labels);
}

ObjectiveSpec make_objective_spec(ProblemKind kind, const Dataset& data, std::size_t nodes, double lambda,
                                  std::uint64_t seed) {
  ObjectiveSpec spec;
  spec.kind = kind;
  spec.lambda = lambda;
  spec.partitions = partition_uniform(data.samples(), nodes, seed);
  const auto c = smoothness_constants(spec, data);
  spec.L = c.L_local_max;
  spec.mu = c.mu_local_min;
  return spec;
}

RegressionObjective::RegressionObjective(ObjectiveSpec spec, Dataset data)
    : spec_(std::move(spec)), data_(std::move(data)), reference_(solve_reference(spec_, data_)) {
  for (const auto& part : spec_.partitions) {
    Shard s = make_shard(data_, part);
    shard_features_.push_back(std::move(s.a));
    shard_labels_.push_back(std::move(s.b));
  }
}

Vector RegressionObjective::local_gradient(std::size_t i, const Vector& x) const {
  return shard_gradient(spec_.kind, spec_.lambda, shard_features_.at(i), shard_labels_.at(i), x);
}

double RegressionObjective::value(const Vector& x) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < shard_features_.size(); ++i)
    acc += shard_value(spec_.kind, spec_.lambda, shard_features_[i], shard_labels_[i], x);
  return acc / static_cast<double>(shard_features_.size());
}

QuadraticObjective::QuadraticObjective(Matrix centers)
    : QuadraticObjective(centers, Vector::Ones(centers.rows())) {}

QuadraticObjective::QuadraticObjective(Matrix centers, Vector weights)
    : centers_(std::move(centers)), weights_(std::move(weights)) {
  if (weights_.size() != centers_.rows() || (weights_.array() <= 0.0).any())
    throw std::invalid_argument("QuadraticObjective: one positive weight per node required");
  x_star_ = (centers_.transpose() * weights_) / weights_.sum();
  f_star_ = value(x_star_);
}

Vector QuadraticObjective::local_gradient(std::size_t i, const Vector& x) const {
  const auto r = static_cast<Eigen::Index>(i);
  return weights_(r) * (x - centers_.row(r).transpose());
}

double QuadraticObjective::value(const Vector& x) const {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < centers_.rows(); ++i)
    acc += 0.5 * weights_(i) * (x - centers_.row(i).transpose()).squaredNorm();
  return acc / static_cast<double>(centers_.rows());
}

ProblemKind problem_kind_from_string(const std::string& s) {
  if (s == "linreg" || s == "linear") return ProblemKind::Linear;
  if (s == "logreg" || s == "logistic") return ProblemKind::Logistic;
  throw std::invalid_argument("unknown problem '" + s + "' (expected linreg or logreg)");
}

}  // namespace adcons
