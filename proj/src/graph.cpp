#include "adcons/graph.hpp"

#include <algorithm>
#include <deque>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace adcons {

Graph::Graph(std::size_t n) : n_(n), adjacency_(n * n, 0), neighbors_(n) {}

Graph::Graph(std::size_t n, std::span<const Edge> edges) : Graph(n) {
  for (const auto& [i, j] : edges) add_edge(i, j);
}

Graph Graph::complete(std::size_t n) {
  Graph g(n);
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = i + 1; j < n; ++j) g.add_edge(i, j);
  return g;
}

Graph Graph::path(std::size_t n) {
  Graph g(n);
  for (NodeId i = 0; i + 1 < n; ++i) g.add_edge(i, i + 1);
  return g;
}

Graph Graph::cycle(std::size_t n) {
  Graph g = path(n);
  if (n >= 3) g.add_edge(n - 1, 0);
  return g;
}

void Graph::check_node(NodeId i) const {
  if (i >= n_) throw std::out_of_range("node " + std::to_string(i) + " out of range for graph of size " + std::to_string(n_));
}

bool Graph::add_edge(NodeId i, NodeId j) {
  check_node(i);
  check_node(j);
  if (i == j) throw std::invalid_argument("self-loop on node " + std::to_string(i));
  if (adjacency_[i * n_ + j]) return false;
  adjacency_[i * n_ + j] = adjacency_[j * n_ + i] = 1;
  auto insert_sorted = [](std::vector<NodeId>& v, NodeId x) { v.insert(std::lower_bound(v.begin(), v.end(), x), x); };
  insert_sorted(neighbors_[i], j);
  insert_sorted(neighbors_[j], i);
  ++edge_count_;
  return true;
}

bool Graph::remove_edge(NodeId i, NodeId j) {
  check_node(i);
  check_node(j);
  if (i == j || !adjacency_[i * n_ + j]) return false;
  adjacency_[i * n_ + j] = adjacency_[j * n_ + i] = 0;
  auto erase_sorted = [](std::vector<NodeId>& v, NodeId x) { v.erase(std::lower_bound(v.begin(), v.end(), x)); };
  erase_sorted(neighbors_[i], j);
  erase_sorted(neighbors_[j], i);
  --edge_count_;
  return true;
}

bool Graph::has_edge(NodeId i, NodeId j) const {
  check_node(i);
  check_node(j);
  return adjacency_[i * n_ + j] != 0;
}

std::size_t Graph::max_degree() const {
  std::size_t best = 0;
  for (const auto& nb : neighbors_) best = std::max(best, nb.size());
  return best;
}

std::vector<Edge> Graph::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count_);
  for (NodeId i = 0; i < n_; ++i)
    for (NodeId j : neighbors_[i])
      if (i < j) out.emplace_back(i, j);
  return out;
}

Graph erdos_renyi(std::size_t n, double p, std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("edge probability must lie in [0, 1]");
  std::mt19937_64 rng(seed);
  Graph g(n);
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j = i + 1; j < n; ++j) {
      // 53 high bits -> uniform in [0, 1); independent of the standard library's distributions.
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      if (u < p) g.add_edge(i, j);
    }
  }
  return g;
}

namespace {

// Distances from `source`; unreachable nodes keep kInfiniteDiameter.
std::vector<std::size_t> bfs_distances(const Graph& g, NodeId source) {
  std::vector<std::size_t> dist(g.size(), kInfiniteDiameter);
  std::deque<NodeId> queue{source};
  dist[source] = 0;
  while (!queue.empty()) {
    const NodeId u = queue.front();
    queue.pop_front();
    for (NodeId v : g.neighbors(u)) {
      if (dist[v] == kInfiniteDiameter) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
  }
  return dist;
}

}  // namespace

bool is_connected(const Graph& g) {
  if (g.size() <= 1) return true;
  const auto dist = bfs_distances(g, 0);
  return std::none_of(dist.begin(), dist.end(), [](std::size_t d) { return d == kInfiniteDiameter; });
}

std::size_t diameter(const Graph& g) {
  std::size_t best = 0;
  for (NodeId s = 0; s < g.size(); ++s) {
    for (std::size_t d : bfs_distances(g, s)) {
      if (d == kInfiniteDiameter) return kInfiniteDiameter;
      best = std::max(best, d);
    }
  }
  return best;
}

Graph graph_union(std::span<const Graph> graphs) {
  if (graphs.empty()) throw std::invalid_argument("graph_union of an empty sequence");
  Graph out(graphs.front().size());
  for (const Graph& g : graphs) {
    if (g.size() != out.size()) throw std::invalid_argument("graph_union: node counts differ");
    for (const auto& [i, j] : g.edges()) out.add_edge(i, j);
  }
  return out;
}

GraphMetrics metrics(const Graph& g) {
  GraphMetrics m;
  m.diameter = diameter(g);
  m.connected = m.diameter != kInfiniteDiameter;
  m.max_degree = g.max_degree();
  m.edge_count = g.edge_count();
  return m;
}

void write_edge_list(std::ostream& out, const Graph& g) {
  out << "n=" << g.size() << '\n';
  for (const auto& [i, j] : g.edges()) out << i << ' ' << j << '\n';
}

Graph read_edge_list(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("n=", 0) != 0) throw std::runtime_error("edge list: missing 'n=<count>' header");
  std::size_t n = 0;
  try {
    n = std::stoul(line.substr(2));
  } catch (const std::exception&) {
    throw std::runtime_error("edge list: bad header '" + line + "'");
  }
  Graph g(n);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream row(line);
    long long i = -1, j = -1;
    std::string rest;
    if (!(row >> i >> j) || (row >> rest) || i < 0 || j < 0 || i >= j || static_cast<std::size_t>(j) >= n)
      throw std::runtime_error("edge list: malformed line " + std::to_string(lineno) + ": '" + line + "'");
    if (!g.add_edge(static_cast<NodeId>(i), static_cast<NodeId>(j)))
      throw std::runtime_error("edge list: duplicate edge on line " + std::to_string(lineno));
  }
  return g;
}

std::string to_edge_list(const Graph& g) {
  std::ostringstream out;
  write_edge_list(out, g);
  return out.str();
}

}  // namespace adcons
