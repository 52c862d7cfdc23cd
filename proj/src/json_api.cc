#include "mantra/json_api.h"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <set>

#include "mantra/errors.h"
#include "mantra/mol_graph.h"
#include "mantra/properties.h"

namespace mantra {

namespace {

Json num(double x) { return std::isfinite(x) ? Json(round_sig(x)) : Json(nullptr); }

Json opt_num(const std::optional<double>& x) { return x ? num(*x) : Json(nullptr); }

Json opt_text(const std::optional<std::string>& s) { return s ? Json(*s) : Json(nullptr); }

Json activity_class_json(const std::optional<double>& a) {
  if (!a || !std::isfinite(*a)) return nullptr;
  return std::string(to_string(activity_class(*a)));
}

void check_keys(const Json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) throw RequestError("unknown field '" + key + "'" + where);
  }
}

std::size_t get_count(const Json& body, const char* key, std::size_t fallback) {
  if (!body.contains(key)) return fallback;
  const Json& v = body[key];
  if (!v.is_number_unsigned()) throw RequestError(std::string(key) + " must be a non-negative integer");
  return v.get<std::size_t>();
}

double get_real(const Json& body, const char* key, double fallback, const std::string& where = "") {
  if (!body.contains(key)) return fallback;
  const Json& v = body[key];
  if (!v.is_number()) throw RequestError(where + key + " must be a number");
  return v.get<double>();
}

Endpoint endpoint_from_json(const Json& j, const char* which) {
  std::string w = which;
  if (!j.is_object() || j.size() != 1) {
    throw RequestError(w + " must be an object with exactly one of coords, label or id");
  }
  check_keys(j, {"coords", "label", "id"}, " in " + w);
  if (j.contains("label")) {
    if (!j["label"].is_string()) throw RequestError(w + ".label must be a string");
    return Endpoint::of_label(j["label"].get<std::string>());
  }
  if (j.contains("id")) {
    if (!j["id"].is_string()) throw RequestError(w + ".id must be a string");
    return Endpoint::of_record(j["id"].get<std::string>());
  }
  return Endpoint::at(coords_from_json(j["coords"], (w + ".coords").c_str()));
}

Json endpoint_json(const Endpoint& e) {
  switch (e.kind) {
    case Endpoint::Kind::kLabel:
      return {{"label", e.label}};
    case Endpoint::Kind::kRecord:
      return {{"id", e.id}};
    case Endpoint::Kind::kCoords:
      break;
  }
  return {{"coords", to_json(e.coords)}};
}

Json vote_json(const LabelVote& v) {
  Json votes = Json::object();
  for (const auto& [label, count] : v.votes) votes[label] = count;
  return votes;
}

}  // namespace

double round_sig(double x) {
  if (!std::isfinite(x) || x == 0.0) return x;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return std::strtod(buf, nullptr);
}

Vector coords_from_json(const Json& c, const char* what) {
  std::string w = what;
  if (!c.is_array() || c.empty()) throw RequestError(w + " must be a non-empty array of numbers");
  Vector z(static_cast<Eigen::Index>(c.size()));
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (!c[i].is_number()) throw RequestError(w + " must be a non-empty array of numbers");
    z(static_cast<Eigen::Index>(i)) = c[i].get<double>();
    if (!std::isfinite(z(static_cast<Eigen::Index>(i)))) throw RequestError(w + " must be finite");
  }
  return z;
}

Json to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(num(v(i)));
  return out;
}

TraversalRequest request_from_json(const Json& body) {
  if (!body.is_object()) throw RequestError("request body must be a JSON object");
  check_keys(body,
             {"source", "destination", "m", "n", "K", "weights", "mode", "sigma", "seed", "astar_lambda", "label_k"},
             "");
  TraversalRequest r;
  if (!body.contains("source")) throw RequestError("source is required");
  if (!body.contains("destination")) throw RequestError("destination is required");
  r.source = endpoint_from_json(body["source"], "source");
  r.destination = endpoint_from_json(body["destination"], "destination");
  r.m = get_count(body, "m", r.m);
  r.n = get_count(body, "n", r.n);
  r.k = get_count(body, "K", r.k);
  r.label_k = get_count(body, "label_k", r.label_k);
  if (body.contains("seed")) {
    if (!body["seed"].is_number_unsigned()) throw RequestError("seed must be a non-negative integer");
    r.seed = body["seed"].get<std::uint64_t>();
  }
  r.sigma = get_real(body, "sigma", r.sigma);
  r.astar_lambda = get_real(body, "astar_lambda", r.astar_lambda);
  if (body.contains("mode")) {
    if (!body["mode"].is_string()) throw RequestError("mode must be a string");
    r.mode = parse_mode(body["mode"].get<std::string>());
  }
  if (body.contains("weights")) {
    const Json& w = body["weights"];
    if (!w.is_object()) throw RequestError("weights must be an object");
    check_keys(w, {"jacobian", "fingerprint", "sa", "druglike", "activity"}, " in weights");
    r.weights.jacobian = get_real(w, "jacobian", r.weights.jacobian, "weights.");
    r.weights.heuristics.fingerprint = get_real(w, "fingerprint", r.weights.heuristics.fingerprint, "weights.");
    r.weights.heuristics.sa = get_real(w, "sa", r.weights.heuristics.sa, "weights.");
    r.weights.heuristics.druglike = get_real(w, "druglike", r.weights.heuristics.druglike, "weights.");
    r.weights.heuristics.activity = get_real(w, "activity", r.weights.heuristics.activity, "weights.");
  }
  check_request(r);
  return r;
}

Json to_json(const TraversalRequest& r) {
  const HeuristicWeights& h = r.weights.heuristics;
  return {{"source", endpoint_json(r.source)},
          {"destination", endpoint_json(r.destination)},
          {"m", r.m},
          {"n", r.n},
          {"K", r.k},
          {"weights",
           {{"jacobian", num(r.weights.jacobian)},
            {"fingerprint", num(h.fingerprint)},
            {"sa", num(h.sa)},
            {"druglike", num(h.druglike)},
            {"activity", num(h.activity)}}},
          {"mode", std::string(to_string(r.mode))},
          {"sigma", num(r.sigma)},
          {"seed", r.seed},
          {"astar_lambda", num(r.astar_lambda)},
          {"label_k", r.label_k}};
}

Json to_json(const GeneratedCompound& c) {
  return {{"smiles", c.text},
          {"complete", c.complete},
          {"valid", c.valid},
          {"novel", c.novel},
          {"reasons", c.reasons},
          {"properties",
           {{"mw", opt_num(c.molecular_weight)},
            {"sa", opt_num(c.sa)},
            {"drug_likeness", opt_num(c.drug_likeness)},
            {"potential_activity", opt_num(c.potential_activity)},
            {"activity_class", activity_class_json(c.potential_activity)}}},
          {"potential_label", opt_text(c.potential_label.label)},
          {"label_votes", vote_json(c.potential_label)}};
}

Json to_json(const TraversalResult& result, const LatentIndex& index) {
  Json paths = Json::array();
  Json compounds = Json::array();
  for (std::size_t p = 0; p < result.paths.size(); ++p) {
    const TraversalPath& path = result.paths[p];
    Json nodes = Json::array();
    for (const PathNode& node : path.nodes) {
      nodes.push_back(node.record ? Json(index.record(*node.record).id) : Json(nullptr));
    }
    Json points = Json::array();
    for (const Vector& z : path.points) points.push_back(to_json(z));
    paths.push_back({{"index", p}, {"nodes", nodes}, {"cost", num(path.cost)}, {"points", points}});
    for (std::size_t s = 0; s < path.compounds.size(); ++s) {
      Json c = {{"path", p}, {"step", s}};
      c.update(to_json(path.compounds[s]));
      compounds.push_back(std::move(c));
    }
  }
  const TraversalStats& st = result.stats;
  Json region = nullptr;
  if (result.region) {
    Json ids = Json::array();
    for (std::size_t i : result.region->records) ids.push_back(index.record(i).id);
    region = {{"empty", result.region->empty},
              {"lo", result.region->empty ? Json(nullptr) : to_json(result.region->lo)},
              {"hi", result.region->empty ? Json(nullptr) : to_json(result.region->hi)},
              {"ids", ids}};
  }
  return {{"source", to_json(result.source)},
          {"destination", to_json(result.destination)},
          {"source_decoded_valid", result.source_decoded_valid},
          {"destination_decoded_valid", result.destination_decoded_valid},
          {"components", result.components},
          {"paths", paths},
          {"compounds", compounds},
          {"stats",
           {{"total", st.total},
            {"complete", st.complete},
            {"valid", st.valid},
            {"novel", st.novel},
            {"unique_valid_novel", st.unique_valid_novel},
            {"unique_complete_novel", st.unique_complete_novel}}},
          {"region", region}};
}

Json record_json(const LatentIndex& index, std::size_t i, const Grammar& grammar) {
  const CompoundRecord& r = index.record(i);
  const CompoundProperties& p = index.properties(i);
  LipinskiCounts counts = lipinski_counts(to_molgraph(r.smiles, grammar));
  return {{"id", r.id},
          {"smiles", r.smiles},
          {"label", opt_text(r.label)},
          {"activity", opt_num(r.activity)},
          {"activity_class", activity_class_json(r.activity)},
          {"properties",
           {{"mw", num(p.molecular_weight)},
            {"sa", num(p.sa)},
            {"drug_likeness", num(p.drug_likeness)},
            {"h_donors", counts.h_donors},
            {"h_acceptors", counts.h_acceptors},
            {"rotatable_bonds", counts.rotatable_bonds}}},
          {"coords", to_json(index.point(i))}};
}

Json labels_json(const LatentIndex& index) {
  Json labels = Json::array();
  std::size_t labeled = 0;
  for (const auto& [label, count] : index.label_counts()) {
    labels.push_back({{"label", label}, {"count", count}});
    labeled += count;
  }
  return {{"labels", labels}, {"unlabeled", index.size() - labeled}};
}

Json projection_json(const LatentIndex& index, const Projection& projection) {
  Json points = Json::array();
  for (std::size_t i = 0; i < index.size(); ++i) {
    auto c = static_cast<Eigen::Index>(i);
    points.push_back({{"id", index.record(i).id},
                      {"x", num(projection.xy(0, c))},
                      {"y", num(projection.xy(1, c))},
                      {"label", opt_text(index.record(i).label)}});
  }
  return {{"points", points}, {"variance", {num(projection.variance[0]), num(projection.variance[1])}}};
}

Json error_json(const std::string& error, const std::string& detail) {
  return {{"error", error}, {"detail", detail}};
}

}  // namespace mantra
