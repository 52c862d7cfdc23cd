#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "mantra/heuristics.h"
#include "mantra/latent_index.h"
#include "mantra/latent_space.h"

namespace mantra {

/// Multiplier on the Jacobian term plus one weight per heuristic.
struct EdgeWeighting {
  double jacobian = 1.0;
  HeuristicWeights heuristics;
};

/// Throws RequestError unless every weight is finite and non-negative.
void check_weighting(const EdgeWeighting& w);

struct EdgeComponents {
  double jacobian = 0.0;
  HeuristicVector heuristics;
};

/// jacobian * J + sum_k W^k H^k.
double edge_weight(const EdgeComponents& c, const EdgeWeighting& w);

struct GraphEdge {
  std::size_t to = 0;
  double weight = 0.0;
  EdgeComponents components;
};

/// Undirected weighted graph over latent points. Each node carries its
/// coordinates; each edge keeps the components its weight was formed from.
class PoiGraph {
 public:
  PoiGraph() = default;

  std::size_t add_node(Vector coords);
  /// Inserts (a, b) and (b, a) with the same components. Throws on a self
  /// loop or an existing edge.
  void add_edge(std::size_t a, std::size_t b, const EdgeComponents& c, const EdgeWeighting& w);
  /// Plain weighted edge with no stored components.
  void add_edge(std::size_t a, std::size_t b, double weight);

  std::size_t node_count() const { return coords_.size(); }
  std::size_t edge_count() const { return edge_count_; }
  const Vector& coords(std::size_t node) const { return coords_[node]; }
  const std::vector<GraphEdge>& edges(std::size_t node) const { return adjacency_[node]; }
  std::optional<double> weight(std::size_t a, std::size_t b) const;
  bool has_edge(std::size_t a, std::size_t b) const { return weight(a, b).has_value(); }

  /// Same topology with every weight recomputed from the stored components.
  PoiGraph reweighted(const EdgeWeighting& w) const;

  /// Connected-component id per node, numbered by lowest member.
  std::vector<std::size_t> components() const;
  std::size_t component_count() const;

 private:
  std::vector<Vector> coords_;
  std::vector<std::vector<GraphEdge>> adjacency_;
  std::size_t edge_count_ = 0;
};

/// Nodes 0..N-1 are the index records. Each record is joined to its n nearest
/// other records; weights follow `weighting` with the Jacobian term taken
/// from `metric` at the edge midpoint.
PoiGraph build_poi_graph(const LatentIndex& index, const LatentMap& metric, std::size_t n,
                         const EdgeWeighting& weighting);

struct GraphPath {
  std::vector<std::size_t> nodes;
  double cost = 0.0;

  friend bool operator==(const GraphPath&, const GraphPath&) = default;
};

/// Sum of edge weights along `nodes`, accumulated from the first edge.
double path_cost(const PoiGraph& graph, const std::vector<std::size_t>& nodes);

struct SearchOptions {
  /// A* heuristic scale on Euclidean distance to the target. 0 gives
  /// Dijkstra. Admissible only when every edge weight >= lambda * its length.
  double astar_lambda = 0.0;
};

/// Minimum-cost path; among equal costs the lexicographically smallest node
/// sequence. Throws NoPathError when t is unreachable.
GraphPath shortest_path(const PoiGraph& graph, std::size_t s, std::size_t t, const SearchOptions& opts = {});

/// Up to k loopless paths ordered by (cost, node sequence). Throws NoPathError
/// when no path exists.
std::vector<GraphPath> yen_k_paths(const PoiGraph& graph, std::size_t s, std::size_t t, std::size_t k,
                                   const SearchOptions& opts = {});

}  // namespace mantra
