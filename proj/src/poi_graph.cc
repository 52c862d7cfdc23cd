#include "mantra/poi_graph.h"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

#include "mantra/errors.h"

namespace mantra {

namespace {

struct Label {
  double f = 0.0;
  double dist = 0.0;
  std::vector<std::size_t> seq;
};

struct LabelGreater {
  bool operator()(const Label& a, const Label& b) const {
    if (a.f != b.f) return a.f > b.f;
    if (a.dist != b.dist) return a.dist > b.dist;
    return a.seq > b.seq;
  }
};

bool better(double dist, const std::vector<std::size_t>& seq, const std::optional<Label>& current) {
  if (!current) return true;
  if (dist != current->dist) return dist < current->dist;
  return seq < current->seq;
}

std::optional<GraphPath> search(const PoiGraph& g, std::size_t s, std::size_t t, const SearchOptions& opts,
                                const std::vector<bool>& blocked_nodes,
                                const std::set<std::pair<std::size_t, std::size_t>>& blocked_edges) {
  auto h = [&](std::size_t u) {
    return opts.astar_lambda == 0.0 ? 0.0 : opts.astar_lambda * (g.coords(u) - g.coords(t)).norm();
  };
  std::vector<std::optional<Label>> best(g.node_count());
  std::vector<bool> done(g.node_count(), false);
  std::priority_queue<Label, std::vector<Label>, LabelGreater> open;
  best[s] = Label{h(s), 0.0, {s}};
  open.push(*best[s]);
  while (!open.empty()) {
    Label cur = open.top();
    open.pop();
    std::size_t u = cur.seq.back();
    if (done[u] || cur.dist != best[u]->dist || cur.seq != best[u]->seq) continue;
    done[u] = true;
    if (u == t) return GraphPath{cur.seq, path_cost(g, cur.seq)};
    for (const GraphEdge& e : g.edges(u)) {
      std::size_t v = e.to;
      if (done[v] || blocked_nodes[v] || blocked_edges.count({u, v})) continue;
      double dist = cur.dist + e.weight;
      std::vector<std::size_t> seq = cur.seq;
      seq.push_back(v);
      if (!better(dist, seq, best[v])) continue;
      best[v] = Label{dist + h(v), dist, std::move(seq)};
      open.push(*best[v]);
    }
  }
  return std::nullopt;
}

void check_node(const PoiGraph& g, std::size_t n) {
  if (n >= g.node_count()) throw std::out_of_range("graph node " + std::to_string(n) + " out of range");
}

}  // namespace

void check_weighting(const EdgeWeighting& w) {
  for (double x : {w.jacobian, w.heuristics.fingerprint, w.heuristics.sa, w.heuristics.druglike,
                   w.heuristics.activity}) {
    if (!std::isfinite(x) || x < 0.0) throw RequestError("weights must be finite and non-negative");
  }
}

double edge_weight(const EdgeComponents& c, const EdgeWeighting& w) {
  return w.jacobian * c.jacobian + weighted_sum(c.heuristics, w.heuristics);
}

std::size_t PoiGraph::add_node(Vector coords) {
  coords_.push_back(std::move(coords));
  adjacency_.emplace_back();
  return coords_.size() - 1;
}

void PoiGraph::add_edge(std::size_t a, std::size_t b, const EdgeComponents& c, const EdgeWeighting& w) {
  check_node(*this, a);
  check_node(*this, b);
  if (a == b) throw std::invalid_argument("self loop on graph node " + std::to_string(a));
  if (has_edge(a, b)) throw std::invalid_argument("duplicate graph edge");
  double weight = edge_weight(c, w);
  if (!std::isfinite(weight) || weight < 0.0) throw std::invalid_argument("edge weight must be finite and >= 0");
  adjacency_[a].push_back(GraphEdge{b, weight, c});
  adjacency_[b].push_back(GraphEdge{a, weight, c});
  ++edge_count_;
}

void PoiGraph::add_edge(std::size_t a, std::size_t b, double weight) {
  EdgeComponents c;
  c.jacobian = weight;
  add_edge(a, b, c, EdgeWeighting{1.0, {0.0, 0.0, 0.0, 0.0}});
}

std::optional<double> PoiGraph::weight(std::size_t a, std::size_t b) const {
  if (a >= node_count() || b >= node_count()) return std::nullopt;
  for (const auto& e : adjacency_[a]) {
    if (e.to == b) return e.weight;
  }
  return std::nullopt;
}

PoiGraph PoiGraph::reweighted(const EdgeWeighting& w) const {
  check_weighting(w);
  PoiGraph g = *this;
  for (auto& list : g.adjacency_) {
    for (auto& e : list) e.weight = edge_weight(e.components, w);
  }
  return g;
}

std::vector<std::size_t> PoiGraph::components() const {
  const std::size_t none = node_count();
  std::vector<std::size_t> id(node_count(), none);
  for (std::size_t root = 0; root < node_count(); ++root) {
    if (id[root] != none) continue;
    std::vector<std::size_t> stack{root};
    id[root] = root;
    while (!stack.empty()) {
      std::size_t u = stack.back();
      stack.pop_back();
      for (const auto& e : adjacency_[u]) {
        if (id[e.to] == none) {
          id[e.to] = root;
          stack.push_back(e.to);
        }
      }
    }
  }
  return id;
}

std::size_t PoiGraph::component_count() const {
  auto id = components();
  std::size_t n = 0;
  for (std::size_t i = 0; i < id.size(); ++i) n += id[i] == i;
  return n;
}

PoiGraph build_poi_graph(const LatentIndex& index, const LatentMap& metric, std::size_t n,
                         const EdgeWeighting& weighting) {
  check_weighting(weighting);
  if (n == 0) throw RequestError("neighbour count n must be at least 1");
  if (index.size() < 2) throw RequestError("graph needs at least two indexed points");
  if (n >= index.size()) {
    throw RequestError("neighbour count n=" + std::to_string(n) + " must be below the index size " +
                       std::to_string(index.size()));
  }
  PoiGraph g;
  for (std::size_t i = 0; i < index.size(); ++i) g.add_node(index.point(i));
  std::set<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < index.size(); ++i) {
    for (const Neighbor& nb : index.knn(index.point(i), n, i)) pairs.emplace(std::min(i, nb.index), std::max(i, nb.index));
  }
  for (const auto& [a, b] : pairs) {
    EdgeComponents c;
    c.jacobian = jacobian_term(metric, index.point(a), index.point(b)).value;
    c.heuristics = heuristic_distance(index.properties(a), index.properties(b));
    g.add_edge(a, b, c, weighting);
  }
  return g;
}

double path_cost(const PoiGraph& graph, const std::vector<std::size_t>& nodes) {
  double cost = 0.0;
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    auto w = graph.weight(nodes[i - 1], nodes[i]);
    if (!w) throw std::invalid_argument("path uses a missing edge");
    cost += *w;
  }
  return cost;
}

GraphPath shortest_path(const PoiGraph& graph, std::size_t s, std::size_t t, const SearchOptions& opts) {
  check_node(graph, s);
  check_node(graph, t);
  auto p = search(graph, s, t, opts, std::vector<bool>(graph.node_count(), false), {});
  if (!p) throw NoPathError("no path between nodes " + std::to_string(s) + " and " + std::to_string(t));
  return *p;
}

std::vector<GraphPath> yen_k_paths(const PoiGraph& graph, std::size_t s, std::size_t t, std::size_t k,
                                   const SearchOptions& opts) {
  if (k == 0) throw RequestError("K must be at least 1");
  std::vector<GraphPath> found{shortest_path(graph, s, t, opts)};
  std::set<std::pair<double, std::vector<std::size_t>>> candidates;
  while (found.size() < k) {
    const std::vector<std::size_t> prev = found.back().nodes;
    for (std::size_t i = 0; i + 1 < prev.size(); ++i) {
      std::vector<std::size_t> root(prev.begin(), prev.begin() + static_cast<std::ptrdiff_t>(i) + 1);
      std::set<std::pair<std::size_t, std::size_t>> blocked_edges;
      for (const auto& p : found) {
        if (p.nodes.size() > i + 1 && std::equal(root.begin(), root.end(), p.nodes.begin())) {
          blocked_edges.emplace(p.nodes[i], p.nodes[i + 1]);
        }
      }
      std::vector<bool> blocked_nodes(graph.node_count(), false);
      for (std::size_t j = 0; j < i; ++j) blocked_nodes[root[j]] = true;
      auto spur = search(graph, prev[i], t, opts, blocked_nodes, blocked_edges);
      if (!spur) continue;
      std::vector<std::size_t> total = root;
      total.insert(total.end(), spur->nodes.begin() + 1, spur->nodes.end());
      candidates.emplace(path_cost(graph, total), std::move(total));
    }
    bool added = false;
    while (!candidates.empty() && !added) {
      auto best = candidates.begin();
      GraphPath p{best->second, best->first};
      candidates.erase(best);
      if (std::none_of(found.begin(), found.end(), [&](const GraphPath& f) { return f.nodes == p.nodes; })) {
        found.push_back(std::move(p));
        added = true;
      }
    }
    if (!added) break;
  }
  return found;
}

}  // namespace mantra
