#include "mantra/traversal.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

#include "mantra/errors.h"

namespace mantra {

namespace {

constexpr std::size_t kPerturbAttempts = 8;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

bool same_point(const Vector& a, const Vector& b) { return a.size() == b.size() && (a.array() == b.array()).all(); }

std::vector<Vector> polyline_for(const PoiGraph& g, const std::vector<std::size_t>& nodes, const Vector& s,
                                 const Vector& d) {
  std::vector<Vector> line;
  line.reserve(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (i == 0) {
      line.push_back(s);
    } else if (i + 1 == nodes.size()) {
      line.push_back(d);
    } else {
      line.push_back(g.coords(nodes[i]));
    }
  }
  return line;
}

}  // namespace

std::vector<Vector> segment_path(const std::vector<Vector>& polyline, std::size_t m) {
  if (polyline.size() < 2) throw std::invalid_argument("segment_path needs at least two vertices");
  if (m < 2) throw RequestError("m must be at least 2");
  std::vector<double> cum(polyline.size(), 0.0);
  for (std::size_t i = 1; i < polyline.size(); ++i) cum[i] = cum[i - 1] + (polyline[i] - polyline[i - 1]).norm();
  const double total = cum.back();
  if (total == 0.0 && m > 2) throw std::invalid_argument("cannot segment a zero-length path into more than 2 points");

  std::vector<Vector> out;
  out.reserve(m);
  out.push_back(polyline.front());
  std::size_t seg = 0;
  for (std::size_t k = 1; k + 1 < m; ++k) {
    double t = total * static_cast<double>(k) / static_cast<double>(m - 1);
    while (seg + 2 < polyline.size() && cum[seg + 1] <= t) ++seg;
    double len = cum[seg + 1] - cum[seg];
    double frac = len > 0.0 ? std::clamp((t - cum[seg]) / len, 0.0, 1.0) : 0.0;
    out.push_back(polyline[seg] + frac * (polyline[seg + 1] - polyline[seg]));
  }
  out.push_back(polyline.back());
  return out;
}

std::vector<Vector> linear_interpolation(const Vector& a, const Vector& b, std::size_t m) {
  if (m < 2) throw RequestError("m must be at least 2");
  std::vector<Vector> out;
  out.reserve(m);
  out.push_back(a);
  for (std::size_t k = 1; k + 1 < m; ++k) {
    double t = static_cast<double>(k) / static_cast<double>(m - 1);
    out.push_back(a + t * (b - a));
  }
  out.push_back(b);
  return out;
}

Vector perturb(const Vector& z, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw RequestError("sigma must be finite and non-negative");
  if (sigma == 0.0) return z;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Vector out = z;
  for (Eigen::Index i = 0; i < out.size(); ++i) out(i) += sigma * g(rng);
  return out;
}

LabelVote label_by_neighbors(const LatentIndex& index, const Vector& z, std::size_t k) {
  if (index.size() == 0) throw std::invalid_argument("label_by_neighbors on an empty index");
  if (k == 0) throw RequestError("label neighbour count must be at least 1");
  LabelVote vote;
  std::map<std::string, double> distance;
  for (const Neighbor& nb : index.knn(z, std::min(k, index.size()))) {
    const auto& label = index.record(nb.index).label;
    if (!label) continue;
    ++vote.votes[*label];
    distance[*label] += nb.distance;
  }
  for (const auto& [label, count] : vote.votes) {
    if (!vote.label) {
      vote.label = label;
      continue;
    }
    std::size_t best = vote.votes[*vote.label];
    if (count > best || (count == best && distance[label] < distance[*vote.label])) vote.label = label;
  }
  return vote;
}

Region mine_region(const std::vector<std::vector<Vector>>& paths, const LatentIndex& index) {
  Region r;
  for (const auto& path : paths) {
    if (path.empty()) continue;
    Vector lo = path.front(), hi = path.front();
    for (const auto& p : path) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    if (r.lo.size() == 0) {
      r.lo = lo;
      r.hi = hi;
    } else {
      r.lo = r.lo.cwiseMax(lo);
      r.hi = r.hi.cwiseMin(hi);
    }
  }
  r.empty = r.lo.size() == 0 || (r.lo.array() > r.hi.array()).any();
  if (r.empty) return r;
  for (std::size_t i = 0; i < index.size(); ++i) {
    Vector p = index.point(i);
    if (p.size() == r.lo.size() && (p.array() >= r.lo.array()).all() && (p.array() <= r.hi.array()).all()) {
      r.records.push_back(i);
    }
  }
  return r;
}

std::string_view to_string(TraversalMode mode) {
  switch (mode) {
    case TraversalMode::kYen:
      return "yen";
    case TraversalMode::kPerturb:
      return "perturb";
    case TraversalMode::kVaryM:
      return "vary_m";
  }
  return "yen";
}

TraversalMode parse_mode(std::string_view text) {
  if (text == "yen") return TraversalMode::kYen;
  if (text == "perturb") return TraversalMode::kPerturb;
  if (text == "vary_m") return TraversalMode::kVaryM;
  throw RequestError("unknown mode '" + std::string(text) + "' (expected yen, perturb or vary_m)");
}

void check_request(const TraversalRequest& r) {
  if (r.m < 2) throw RequestError("m must be at least 2");
  if (r.n < 1) throw RequestError("n must be at least 1");
  if (r.k < 1) throw RequestError("K must be at least 1");
  if (r.label_k < 1) throw RequestError("label_k must be at least 1");
  if (!std::isfinite(r.sigma) || r.sigma < 0.0) throw RequestError("sigma must be finite and non-negative");
  if (!std::isfinite(r.astar_lambda) || r.astar_lambda < 0.0) {
    throw RequestError("astar_lambda must be finite and non-negative");
  }
  check_weighting(r.weights);
}

GeneratedCompound describe_point(const TraversalContext& ctx, const Vector& z, std::size_t label_k) {
  GeneratedCompound c;
  DecoderOutput out = ctx.decoder.decode(z, ctx.grammar);
  c.text = out.text;
  c.complete = out.complete;
  c.valid = out.valid;
  c.reasons = out.reasons;
  c.novel = c.complete && !ctx.index.contains_smiles(c.text);
  if (c.valid) {
    try {
      MolGraph mol = to_molgraph(c.text, ctx.grammar);
      LipinskiCounts counts = lipinski_counts(mol);
      c.molecular_weight = counts.molecular_weight;
      c.drug_likeness = drug_likeness(counts);
      c.sa = sa_score(mol, ctx.table);
      c.novel = c.novel && !ctx.index.contains_fingerprint(fingerprint(mol));
    } catch (const std::exception& e) {
      c.valid = false;
      c.reasons.push_back(e.what());
    }
  }
  std::size_t k = std::min(label_k, ctx.index.size());
  c.potential_label = label_by_neighbors(ctx.index, z, k);
  double sum = 0.0;
  std::size_t known = 0;
  for (const Neighbor& nb : ctx.index.knn(z, k)) {
    if (auto a = ctx.index.record(nb.index).activity) {
      sum += *a;
      ++known;
    }
  }
  if (known > 0) c.potential_activity = sum / static_cast<double>(known);
  return c;
}

TraversalStats summarize(const std::vector<GeneratedCompound>& compounds) {
  TraversalStats s;
  std::set<std::string> unique, unique_complete;
  for (const auto& c : compounds) {
    ++s.total;
    s.complete += c.complete;
    s.valid += c.valid;
    s.novel += c.novel;
    if (c.valid && c.novel) unique.insert(c.text);
    if (c.complete && c.novel) unique_complete.insert(c.text);
  }
  s.unique_valid_novel = unique.size();
  s.unique_complete_novel = unique_complete.size();
  return s;
}

Vector resolve_endpoint(const LatentIndex& index, const Endpoint& e) {
  switch (e.kind) {
    case Endpoint::Kind::kCoords:
      if (static_cast<std::size_t>(e.coords.size()) != index.dim()) {
        throw RequestError("endpoint has " + std::to_string(e.coords.size()) + " coordinates, index dimension is " +
                           std::to_string(index.dim()));
      }
      if (!e.coords.allFinite()) throw RequestError("endpoint coordinates must be finite");
      return e.coords;
    case Endpoint::Kind::kLabel:
      return centroid(index, e.label);
    case Endpoint::Kind::kRecord: {
      auto i = index.find_id(e.id);
      if (!i) throw RequestError("unknown record id '" + e.id + "'");
      return index.point(*i);
    }
  }
  throw RequestError("bad endpoint");
}

AttachedEndpoints attach_endpoints(PoiGraph& graph, const TraversalContext& ctx, const Vector& s, const Vector& d,
                                   std::size_t n, const EdgeWeighting& weighting) {
  if (n == 0) throw RequestError("n must be at least 1");
  if (n > ctx.index.size()) throw RequestError("n exceeds the index size");
  auto attach = [&](const Vector& z, bool& valid) {
    auto nbrs = ctx.index.knn(z, n);
    std::optional<CompoundProperties> props;
    if (!nbrs.empty() && nbrs.front().distance == 0.0 && same_point(z, ctx.index.point(nbrs.front().index))) {
      props = ctx.index.properties(nbrs.front().index);
    } else {
      DecoderOutput out = ctx.decoder.decode(z, ctx.grammar);
      if (out.valid) props = compute_properties(to_molgraph(out.text, ctx.grammar), ctx.table);
    }
    valid = props.has_value();
    std::size_t node = graph.add_node(z);
    for (const Neighbor& nb : nbrs) {
      EdgeComponents c;
      c.jacobian = jacobian_term(ctx.metric, z, ctx.index.point(nb.index)).value;
      if (props) c.heuristics = heuristic_distance(*props, ctx.index.properties(nb.index));
      graph.add_edge(node, nb.index, c, weighting);
    }
    return node;
  };
  AttachedEndpoints a;
  a.source = attach(s, a.source_valid);
  a.destination = attach(d, a.destination_valid);
  return a;
}

std::shared_ptr<const PoiGraph> Navigator::base_graph(std::size_t n) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = cache_.find(n);
  if (it != cache_.end()) return it->second;
  auto g = std::make_shared<const PoiGraph>(
      build_poi_graph(ctx_.index, ctx_.metric, n, EdgeWeighting{1.0, {0.0, 0.0, 0.0, 0.0}}));
  cache_.emplace(n, g);
  return g;
}

std::vector<GeneratedCompound> Navigator::linear_baseline(const Vector& s, const Vector& d, std::size_t m,
                                                          std::size_t label_k) const {
  std::vector<GeneratedCompound> out;
  for (const Vector& z : linear_interpolation(s, d, m)) out.push_back(describe_point(ctx_, z, label_k));
  return out;
}

TraversalResult Navigator::traverse(const TraversalRequest& req) const {
  check_request(req);
  if (req.n >= ctx_.index.size()) {
    throw RequestError("n=" + std::to_string(req.n) + " must be below the index size " +
                       std::to_string(ctx_.index.size()));
  }
  TraversalResult result;
  result.source = resolve_endpoint(ctx_.index, req.source);
  result.destination = resolve_endpoint(ctx_.index, req.destination);
  const PoiGraph weighted = base_graph(req.n)->reweighted(req.weights);
  const SearchOptions opts{req.astar_lambda};
  const std::size_t records = ctx_.index.size();

  struct Route {
    std::vector<std::size_t> nodes;
    double cost;
    std::vector<Vector> polyline;
    std::size_t m;
  };
  std::vector<Route> routes;

  auto routed = [&](const Vector& s, const Vector& d, bool first) {
    PoiGraph g = weighted;
    AttachedEndpoints a = attach_endpoints(g, ctx_, s, d, req.n, req.weights);
    if (first) {
      result.source_decoded_valid = a.source_valid;
      result.destination_decoded_valid = a.destination_valid;
      auto comp = g.components();
      result.components = g.component_count();
      if (comp[a.source] != comp[a.destination]) {
        throw NoPathError("source and destination lie in different graph components");
      }
    }
    return std::make_pair(std::move(g), a);
  };

  auto [graph, ends] = routed(result.source, result.destination, true);
  switch (req.mode) {
    case TraversalMode::kYen:
      for (auto& p : yen_k_paths(graph, ends.source, ends.destination, req.k, opts)) {
        routes.push_back({p.nodes, p.cost, polyline_for(graph, p.nodes, result.source, result.destination), req.m});
      }
      break;
    case TraversalMode::kVaryM: {
      GraphPath p = shortest_path(graph, ends.source, ends.destination, opts);
      auto line = polyline_for(graph, p.nodes, result.source, result.destination);
      for (std::size_t i = 0; i < req.k; ++i) routes.push_back({p.nodes, p.cost, line, req.m + i});
      break;
    }
    case TraversalMode::kPerturb: {
      GraphPath p = shortest_path(graph, ends.source, ends.destination, opts);
      routes.push_back({p.nodes, p.cost, polyline_for(graph, p.nodes, result.source, result.destination), req.m});
      for (std::size_t i = 1; i < req.k; ++i) {
        std::uint64_t key = splitmix64(req.seed ^ splitmix64(i));
        // A draw can land next to another component; redraw a few times.
        for (std::size_t attempt = 0; attempt < kPerturbAttempts; ++attempt, key += 2) {
          Vector s = perturb(result.source, req.sigma, splitmix64(key));
          Vector d = perturb(result.destination, req.sigma, splitmix64(key + 1));
          auto [g, a] = routed(s, d, false);
          GraphPath q;
          try {
            q = shortest_path(g, a.source, a.destination, opts);
          } catch (const NoPathError&) {
            continue;
          }
          // The route keeps the requested endpoints; the perturbation only moves the search.
          routes.push_back({q.nodes, q.cost, polyline_for(g, q.nodes, result.source, result.destination), req.m});
          break;
        }
      }
      std::stable_sort(routes.begin(), routes.end(), [](const Route& a, const Route& b) { return a.cost < b.cost; });
      break;
    }
  }

  std::vector<GeneratedCompound> all;
  std::vector<std::vector<Vector>> segmented;
  for (auto& r : routes) {
    TraversalPath path;
    path.cost = r.cost;
    for (std::size_t k = 0; k < r.nodes.size(); ++k) {
      PathNode node;
      if (r.nodes[k] < records) {
        node.record = r.nodes[k];
      } else {
        node.source = k == 0;
      }
      path.nodes.push_back(node);
    }
    if (r.polyline.size() == 1) r.polyline.push_back(r.polyline.front());
    bool degenerate = std::all_of(r.polyline.begin(), r.polyline.end(),
                                  [&](const Vector& v) { return same_point(v, r.polyline.front()); });
    path.points = degenerate ? std::vector<Vector>(r.m, r.polyline.front()) : segment_path(r.polyline, r.m);
    for (const Vector& z : path.points) {
      path.compounds.push_back(describe_point(ctx_, z, req.label_k));
      all.push_back(path.compounds.back());
    }
    segmented.push_back(path.points);
    result.paths.push_back(std::move(path));
  }
  result.stats = summarize(all);
  if (segmented.size() >= 2) result.region = mine_region(segmented, ctx_.index);
  return result;
}

}  // namespace mantra
