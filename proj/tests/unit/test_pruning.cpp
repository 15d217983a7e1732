#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <vector>

#include "adcons/graph.hpp"
#include "adcons/pruning.hpp"
#include "doctest.h"

using namespace adcons;

namespace {

Matrix column(std::initializer_list<double> v) {
  Matrix m(v.size(), 1);
  int i = 0;
  for (double x : v) m(i++, 0) = x;
  return m;
}

Graph star_at_zero() {
  Graph g(5);
  for (NodeId j : {2, 3, 4}) g.add_edge(0, j);
  return g;
}

}  // namespace

TEST_CASE("dissimilarity") {
  std::vector<double> v{1.5, -2.0, 3.0};
  CHECK(dissimilarity(v, v) == 0.0);
  std::vector<double> e1{1, 0}, e2{0, 1};
  CHECK(dissimilarity(e1, e2) == 2.0);
  std::vector<double> a{0.5, -1.5}, b{1.0, 1.0};
  CHECK(dissimilarity(a, b) == 3.0);
  CHECK(dissimilarity(e1, e2, Dissimilarity::L2) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("budget helpers") {
  CHECK(candidate_budget(0.1, 30) == 3);
  CHECK(candidate_budget(2.0 / 3, 3) == 2);
  CHECK(candidate_budget(0.75, 5) == 3);
  CHECK(candidate_budget(0.5, 0) == 0);
  CHECK(retention_floor(0.3, 10) == 3);
  CHECK(retention_floor(0.25, 5) == 2);
  CHECK(retention_floor(0.0, 7) == 0);
}

TEST_CASE("PruneParams validation") {
  CHECK_NOTHROW(PruneParams::uniform(0.75, 0.25, Beta(1)).validate(4));
  CHECK_THROWS(PruneParams::uniform(0.75, 0.3, Beta(1)).validate(4));
  CHECK_THROWS(PruneParams::uniform(1.2, 0.0, Beta(1)).validate(4));
  CHECK_THROWS(PruneParams::uniform(0.5, 0.0, Beta(-1)).validate(4));
  PruneParams p;
  p.kappa_upper = {0.1, 0.2};
  CHECK_THROWS(p.validate(3));
}

TEST_CASE("select_candidates: kappa 0 is empty") {
  Graph g = Graph::complete(6);
  Matrix est = column({0, 1, 2, 3, 4, 5});
  for (NodeId i = 0; i < 6; ++i)
    CHECK(select_candidates(i, est, g, PruneParams::uniform(0.0, 0.0, Beta(1)), PruneStream{}).empty());
}

TEST_CASE("select_candidates: greedy picks the closest neighbors") {
  Graph g = star_at_zero();
  Matrix est = column({0.0, 7.0, 0.1, 0.5, 0.9});
  auto c = select_candidates(0, est, g, PruneParams::uniform(2.0 / 3, 0.0, Beta::greedy()), PruneStream{});
  CHECK(c == std::vector<NodeId>{2, 3});
  // order of the neighbor values does not matter
  Matrix rev = column({0.0, 7.0, 0.9, 0.5, 0.1});
  auto r = select_candidates(0, rev, g, PruneParams::uniform(2.0 / 3, 0.0, Beta::greedy()), PruneStream{});
  CHECK(r == std::vector<NodeId>{3, 4});
}

TEST_CASE("select_candidates: beta 0 is uniform over subsets") {
  Graph g(5);
  for (NodeId j = 1; j < 5; ++j) g.add_edge(0, j);
  Matrix est = column({0.0, 0.1, 3.0, 5.0, 9.0});
  PruneParams params = PruneParams::uniform(0.5, 0.0, Beta(0.0));
  const int trials = 100000;
  std::map<std::vector<NodeId>, int> counts;
  for (int t = 0; t < trials; ++t) {
    auto c = select_candidates(0, est, g, params, PruneStream{17, static_cast<std::uint64_t>(t), 0});
    REQUIRE(c.size() == 2);
    ++counts[c];
  }
  REQUIRE(counts.size() == 6);
  const double p = 1.0 / 6, expect = trials * p, se = std::sqrt(trials * p * (1 - p));
  double chi2 = 0;
  for (auto& [subset, k] : counts) {
    CHECK(std::abs(k - expect) <= 3 * se);
    chi2 += (k - expect) * (k - expect) / expect;
  }
  CHECK(chi2 < 20.52);  // chi-square, 5 dof, p = 0.001
}

TEST_CASE("select_candidates: first draw follows the softmax") {
  Graph g(4);
  for (NodeId j = 1; j < 4; ++j) g.add_edge(0, j);
  Matrix est = column({0.0, 0.2, 0.6, 1.4});
  const double beta = 2.0;
  // one candidate out of three, so the selection is the first draw
  PruneParams params = PruneParams::uniform(1.0 / 3, 0.0, Beta(beta));
  const int trials = 60000;
  std::vector<int> hits(4, 0);
  for (int t = 0; t < trials; ++t) {
    auto c = select_candidates(0, est, g, params, PruneStream{5, static_cast<std::uint64_t>(t), 0});
    REQUIRE(c.size() == 1);
    ++hits[c[0]];
  }
  double z = 0;
  for (int j = 1; j < 4; ++j) z += std::exp(-beta * est(j, 0));
  for (int j = 1; j < 4; ++j) {
    const double p = std::exp(-beta * est(j, 0)) / z;
    CHECK(std::abs(hits[j] - trials * p) <= 4 * std::sqrt(trials * p * (1 - p)));
  }
  CHECK(hits[1] > hits[2]);
  CHECK(hits[2] > hits[3]);
}

TEST_CASE("execute_pruning: kappa 0 is the identity") {
  Graph g = erdos_renyi(12, 0.5, 3);
  Matrix est = Matrix::Random(12, 3);
  PruneOutcome out = execute_pruning(g, est, PruneParams::uniform(0.0, 0.0, Beta(1)), PruneStream{});
  CHECK(out.pruned_graph == g);
  CHECK(out.removed_count == 0);
}

TEST_CASE("execute_pruning: two nodes prune their only edge") {
  Graph g(2);
  g.add_edge(0, 1);
  PruneOutcome out = execute_pruning(g, column({0, 1}), PruneParams::uniform(1.0, 0.0, Beta(1)), PruneStream{});
  CHECK(out.pruned_graph.edge_count() == 0);
  CHECK(out.candidates[0] == std::vector<NodeId>{1});
  CHECK(out.candidates[1] == std::vector<NodeId>{0});
}

TEST_CASE("execute_pruning: retention guard plus ADD keeps the triangle") {
  Graph g = Graph::complete(3);
  PruneParams params;
  params.kappa_upper = {0.5, 0.0, 0.0};
  params.kappa_lower = {0.0, 1.0, 0.0};
  params.beta = Beta::greedy();
  PruneOutcome out = execute_pruning(g, column({0.0, 0.1, 5.0}), params, PruneStream{});
  CHECK(out.candidates[0] == std::vector<NodeId>{1});
  CHECK(out.pruned_graph == g);

  // Without the guard node 1 honors the request and the edge goes.
  params.kappa_lower = {0.0, 0.0, 0.0};
  PruneOutcome gone = execute_pruning(g, column({0.0, 0.1, 5.0}), params, PruneStream{});
  CHECK_FALSE(gone.pruned_graph.has_edge(0, 1));
  CHECK(gone.pruned_graph.edge_count() == 2);
}

TEST_CASE("execute_pruning: REMOVE symmetrization drops one-sided edges") {
  Graph g = Graph::complete(3);
  PruneParams params;
  params.kappa_upper = {0.5, 0.0, 0.0};
  params.kappa_lower = {0.0, 1.0, 0.0};
  params.beta = Beta::greedy();
  params.symmetrization = Symmetrization::Remove;
  PruneOutcome out = execute_pruning(g, column({0.0, 0.1, 5.0}), params, PruneStream{});
  CHECK_FALSE(out.pruned_graph.has_edge(0, 1));
}

TEST_CASE("execute_pruning invariants on random graphs") {
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    Graph g = erdos_renyi(20, 0.4, seed);
    Matrix est = Matrix::Random(20, 4);
    const double kappa = 0.25 + 0.05 * static_cast<double>(seed % 10);
    PruneParams params = PruneParams::uniform(kappa, 1 - kappa, Beta(1.0));
    PruneStream stream{seed, 2, 0};
    PruneOutcome out = execute_pruning(g, est, params, stream);
    for (auto [i, j] : out.pruned_graph.edges()) CHECK(g.has_edge(i, j));
    for (NodeId i = 0; i < 20; ++i) {
      CHECK(out.candidates[i].size() == candidate_budget(kappa, g.degree(i)));
      CHECK(std::is_sorted(out.candidates[i].begin(), out.candidates[i].end()));
      // per-node evaluation gives the same candidates as the full pass
      CHECK(select_candidates(i, est, g, params, stream) == out.candidates[i]);
      CHECK(out.pruned_graph.degree(i) >= retention_floor(1 - kappa, g.degree(i)));
    }
    CHECK(out.removed_count == g.edge_count() - out.pruned_graph.edge_count());
    PruneOutcome again = execute_pruning(g, est, params, stream);
    CHECK(again.pruned_graph == out.pruned_graph);
    CHECK(again.candidates == out.candidates);
  }
}

TEST_CASE("prune outcome json") {
  Graph g = Graph::complete(3);
  PruneOutcome out = execute_pruning(g, column({0, 1, 2}), PruneParams::uniform(0.5, 0.5, Beta(1)), PruneStream{});
  std::ostringstream s;
  write_prune_outcome_json(s, out);
  CHECK(s.str().find("candidates") != std::string::npos);
}
