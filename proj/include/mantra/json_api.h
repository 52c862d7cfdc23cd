#pragma once

#include <string>

#include "json.hpp"
#include "mantra/projection.h"
#include "mantra/traversal.h"

namespace mantra {

using Json = nlohmann::ordered_json;

/// Rounds to 9 significant digits; every number written by the API goes
/// through this.
double round_sig(double x);
Json to_json(const Vector& v);
/// Non-empty array of finite numbers; RequestError naming `what` otherwise.
Vector coords_from_json(const Json& c, const char* what);

/// Field names: source, destination ({coords}, {label} or {id}), m, n, K,
/// weights {jacobian, fingerprint, sa, druglike, activity}, mode, sigma, seed,
/// astar_lambda, label_k. Missing fields take the TraversalRequest defaults.
/// Throws RequestError on unknown fields, wrong types or bad values.
TraversalRequest request_from_json(const Json& body);
Json to_json(const TraversalRequest& request);

Json to_json(const GeneratedCompound& c);
/// paths carry node ids (null for the attached endpoints), cost and points;
/// compounds is one flat list tagged with path and step.
Json to_json(const TraversalResult& result, const LatentIndex& index);

Json record_json(const LatentIndex& index, std::size_t i, const Grammar& grammar);
Json labels_json(const LatentIndex& index);
Json projection_json(const LatentIndex& index, const Projection& projection);
Json error_json(const std::string& error, const std::string& detail);

}  // namespace mantra
