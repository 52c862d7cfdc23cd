#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "mantra/latent_index.h"
#include "mantra/latent_space.h"
#include "mantra/poi_graph.h"
#include "mantra/properties.h"

namespace mantra {

/// m points at equal arc-length spacing along the polyline; the first and last
/// are copies of its endpoints. Throws on fewer than two vertices, m < 2, or a
/// zero-length polyline with m > 2.
std::vector<Vector> segment_path(const std::vector<Vector>& polyline, std::size_t m);

/// m evenly spaced points on the segment from a to b, endpoints exact.
std::vector<Vector> linear_interpolation(const Vector& a, const Vector& b, std::size_t m);

/// z + sigma * g with g standard normal from `seed`.
Vector perturb(const Vector& z, double sigma, std::uint64_t seed);

struct LabelVote {
  std::optional<std::string> label;  // empty when no neighbour is labeled
  std::map<std::string, std::size_t> votes;
};

/// Majority label among the k nearest records. Unlabeled records do not vote.
/// Ties go to the smaller summed neighbour distance, then the smaller label.
LabelVote label_by_neighbors(const LatentIndex& index, const Vector& z, std::size_t k);

struct Region {
  Vector lo, hi;
  bool empty = true;
  std::vector<std::size_t> records;
};

/// Intersection of the axis-aligned bounding boxes of the paths and the index
/// records inside it (boundary included).
Region mine_region(const std::vector<std::vector<Vector>>& paths, const LatentIndex& index);

struct Endpoint {
  enum class Kind { kCoords, kLabel, kRecord };
  Kind kind = Kind::kCoords;
  Vector coords;
  std::string label;
  std::string id;

  static Endpoint at(Vector z) { return {Kind::kCoords, std::move(z), {}, {}}; }
  static Endpoint of_label(std::string l) { return {Kind::kLabel, {}, std::move(l), {}}; }
  static Endpoint of_record(std::string i) { return {Kind::kRecord, {}, {}, std::move(i)}; }
};

enum class TraversalMode { kYen, kPerturb, kVaryM };

std::string_view to_string(TraversalMode mode);
/// "yen", "perturb" or "vary_m"; RequestError otherwise.
TraversalMode parse_mode(std::string_view text);

struct TraversalRequest {
  Endpoint source;
  Endpoint destination;
  std::size_t m = 100;
  std::size_t n = 8;
  std::size_t k = 4;
  EdgeWeighting weights;
  TraversalMode mode = TraversalMode::kYen;
  double sigma = 0.1;
  std::uint64_t seed = 0;
  double astar_lambda = 0.0;
  std::size_t label_k = 5;
};

/// Throws RequestError on an out-of-range field.
void check_request(const TraversalRequest& r);

struct GeneratedCompound {
  std::string text;
  bool complete = false;
  bool valid = false;
  bool novel = false;  // complete and absent from the index (string, and fingerprint when valid)
  std::vector<std::string> reasons;
  // Set for valid molecules only.
  std::optional<double> molecular_weight, sa, drug_likeness;
  /// Mean activity of the labeled neighbourhood, where any is known.
  std::optional<double> potential_activity;
  LabelVote potential_label;
};

struct PathNode {
  std::optional<std::size_t> record;  // empty for the source and destination
  bool source = false;
};

struct TraversalPath {
  std::vector<PathNode> nodes;
  double cost = 0.0;
  std::vector<Vector> points;
  std::vector<GeneratedCompound> compounds;
};

struct TraversalStats {
  std::size_t total = 0;
  std::size_t complete = 0;
  std::size_t valid = 0;
  std::size_t novel = 0;
  std::size_t unique_valid_novel = 0;
  std::size_t unique_complete_novel = 0;  // syntactic validity only
};

struct TraversalResult {
  Vector source, destination;
  bool source_decoded_valid = false;
  bool destination_decoded_valid = false;
  std::size_t components = 0;
  std::vector<TraversalPath> paths;
  TraversalStats stats;
  std::optional<Region> region;  // when two or more paths exist
};

/// Everything a traversal reads. All members are immutable during use.
struct TraversalContext {
  const LatentIndex& index;
  const LogitDecoder& decoder;
  const LatentMap& metric;  // Jacobian source; usually the decoder itself
  const Grammar& grammar;
  const FragmentTable& table;
};

/// Decodes one latent point and fills validity, novelty and properties.
GeneratedCompound describe_point(const TraversalContext& ctx, const Vector& z, std::size_t label_k);

TraversalStats summarize(const std::vector<GeneratedCompound>& compounds);

/// Coordinates for an endpoint: as given, a label centroid, or a record's point.
Vector resolve_endpoint(const LatentIndex& index, const Endpoint& e);

struct AttachedEndpoints {
  std::size_t source = 0, destination = 0;  // node ids in the extended graph
  bool source_valid = false, destination_valid = false;
};

/// Adds s and d as new nodes joined to their n nearest records. An endpoint
/// that coincides with a record takes that record's properties; otherwise the
/// decoded molecule's, and zero heuristic distances when that decode is
/// invalid.
AttachedEndpoints attach_endpoints(PoiGraph& graph, const TraversalContext& ctx, const Vector& s, const Vector& d,
                                   std::size_t n, const EdgeWeighting& weighting);

/// Caches the record-only graph per neighbour count so repeated traversals
/// only reweight it. Thread-safe.
class Navigator {
 public:
  explicit Navigator(TraversalContext ctx) : ctx_(ctx) {}

  const TraversalContext& context() const { return ctx_; }
  /// Record-only graph for n neighbours with unit Jacobian and zero heuristic weights.
  std::shared_ptr<const PoiGraph> base_graph(std::size_t n) const;

  /// Throws RequestError on a bad request and NoPathError when s and d are
  /// not connected.
  TraversalResult traverse(const TraversalRequest& request) const;

  /// Straight-line baseline: m evenly spaced decodes between the endpoints.
  std::vector<GeneratedCompound> linear_baseline(const Vector& s, const Vector& d, std::size_t m,
                                                 std::size_t label_k = 5) const;

 private:
  TraversalContext ctx_;
  mutable std::mutex mu_;
  mutable std::map<std::size_t, std::shared_ptr<const PoiGraph>> cache_;
};

}  // namespace mantra
