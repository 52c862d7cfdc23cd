#include "mantra/latent_index.h"

#include <stdexcept>

#include "mantra/errors.h"

namespace mantra {

LatentIndex::LatentIndex(Matrix coords, std::vector<CompoundRecord> records, const FragmentTable& table,
                         const Grammar& grammar)
    : coords_(std::move(coords)), records_(std::move(records)) {
  if (static_cast<std::size_t>(coords_.cols()) != records_.size()) {
    throw std::invalid_argument("index coordinates and records differ in length");
  }
  if (!coords_.allFinite()) throw std::invalid_argument("index coordinates must be finite");
  properties_.reserve(records_.size());
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const CompoundRecord& r = records_[i];
    if (!ids_.emplace(r.id, i).second) throw std::invalid_argument("duplicate record id '" + r.id + "'");
    MolGraph mol;
    try {
      mol = to_molgraph(r.smiles, grammar);
    } catch (const std::exception& e) {
      throw MoleculeError("record " + std::to_string(i + 1) + " ('" + r.id + "'): " + e.what());
    }
    properties_.push_back(compute_properties(mol, table, r.activity));
    smiles_.insert(r.smiles);
    fingerprint_buckets_.emplace(properties_.back().fingerprint.popcount(), i);
  }
  tree_ = KdTree(coords_);
}

std::optional<std::size_t> LatentIndex::find_id(const std::string& id) const {
  auto it = ids_.find(id);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

bool LatentIndex::contains_fingerprint(const Fingerprint& fp) const {
  auto [lo, hi] = fingerprint_buckets_.equal_range(fp.popcount());
  for (auto it = lo; it != hi; ++it) {
    if (properties_[it->second].fingerprint == fp) return true;
  }
  return false;
}

std::map<std::string, std::size_t> LatentIndex::label_counts() const {
  std::map<std::string, std::size_t> out;
  for (const auto& r : records_) {
    if (r.label) ++out[*r.label];
  }
  return out;
}

LatentIndex build_index(std::vector<CompoundRecord> records, const ProjectionEncoder& encoder,
                        const FragmentTable& table, const Grammar& grammar) {
  if (records.empty()) throw std::invalid_argument("cannot build an index from an empty dataset");
  Matrix coords(static_cast<Eigen::Index>(encoder.dim()), static_cast<Eigen::Index>(records.size()));
  for (std::size_t i = 0; i < records.size(); ++i) {
    MolGraph mol;
    try {
      mol = to_molgraph(records[i].smiles, grammar);
    } catch (const std::exception& e) {
      throw MoleculeError("row " + std::to_string(i + 1) + " ('" + records[i].id + "'): " + e.what());
    }
    Vector z = encoder.encode(mol);
    for (Eigen::Index k = 0; k < z.size(); ++k) coords(k, static_cast<Eigen::Index>(i)) = static_cast<float>(z(k));
  }
  return LatentIndex(std::move(coords), std::move(records), table, grammar);
}

Vector centroid(const LatentIndex& index, const std::string& label) {
  Vector sum = Vector::Zero(static_cast<Eigen::Index>(index.dim()));
  std::size_t count = 0;
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index.record(i).label == label) {
      sum += index.point(i);
      ++count;
    }
  }
  if (count == 0) throw RequestError("unknown label '" + label + "'");
  return sum / static_cast<double>(count);
}

}  // namespace mantra
