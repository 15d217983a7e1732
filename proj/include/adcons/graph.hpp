#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace adcons {

using NodeId = std::size_t;
using Edge = std::pair<NodeId, NodeId>;

/// Returned by diameter() for a disconnected graph.
inline constexpr std::size_t kInfiniteDiameter = std::numeric_limits<std::size_t>::max();

/// Undirected simple graph on nodes 0..n-1.
///
/// Keeps a dense adjacency bitmap next to sorted neighbor lists, so edge
/// queries are O(1) and neighbor iteration is always in ascending order.
class Graph {
 public:
  Graph() = default;
  explicit Graph(std::size_t n);
  Graph(std::size_t n, std::span<const Edge> edges);

  static Graph complete(std::size_t n);
  static Graph path(std::size_t n);
  static Graph cycle(std::size_t n);

  std::size_t size() const { return n_; }
  std::size_t edge_count() const { return edge_count_; }

  /// Adds {i,j}; returns false if it was already present. Throws on self-loops
  /// or out-of-range nodes.
  bool add_edge(NodeId i, NodeId j);
  bool remove_edge(NodeId i, NodeId j);
  bool has_edge(NodeId i, NodeId j) const;

  std::size_t degree(NodeId i) const { return neighbors_[i].size(); }
  std::size_t max_degree() const;
  const std::vector<NodeId>& neighbors(NodeId i) const { return neighbors_[i]; }

  /// All edges as (i, j) with i < j, in lexicographic order.
  std::vector<Edge> edges() const;

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.n_ == b.n_ && a.neighbors_ == b.neighbors_;
  }

 private:
  void check_node(NodeId i) const;

  std::size_t n_ = 0;
  std::size_t edge_count_ = 0;
  std::vector<std::uint8_t> adjacency_;
  std::vector<std::vector<NodeId>> neighbors_;
};

struct GraphMetrics {
  bool connected = false;
  std::size_t diameter = kInfiniteDiameter;
  std::size_t max_degree = 0;
  std::size_t edge_count = 0;
};

/// G(n, p): pairs (i, j), i < j, visited in lexicographic order with one
/// 64-bit draw each from a seeded mt19937_64.
Graph erdos_renyi(std::size_t n, double p, std::uint64_t seed);

bool is_connected(const Graph& g);

/// Longest BFS shortest-path length; kInfiniteDiameter when disconnected.
std::size_t diameter(const Graph& g);

/// Edge-set union; all inputs must share the node count.
Graph graph_union(std::span<const Graph> graphs);

GraphMetrics metrics(const Graph& g);

// Edge-list text format: "n=<count>" header, then one "i j" line per edge
// with i < j, 0-based.
void write_edge_list(std::ostream& out, const Graph& g);
Graph read_edge_list(std::istream& in);
std::string to_edge_list(const Graph& g);

}  // namespace adcons
