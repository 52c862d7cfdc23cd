#pragma once

#include <map>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "mantra/heuristics.h"
#include "mantra/kdtree.h"
#include "mantra/latent_space.h"
#include "mantra/sa_score.h"

namespace mantra {

struct CompoundRecord {
  std::string id;
  std::string smiles;
  std::optional<std::string> label;
  std::optional<double> activity;

  friend bool operator==(const CompoundRecord&, const CompoundRecord&) = default;
};

/// Embedded compounds with their precomputed properties and a k-d tree over
/// the coordinates. Immutable after construction.
class LatentIndex {
 public:
  LatentIndex() = default;
  /// `coords` is d x N, one column per record. Properties are recomputed from
  /// each record's SMILES against `table`. Throws MoleculeError naming the
  /// record on an invalid molecule.
  LatentIndex(Matrix coords, std::vector<CompoundRecord> records, const FragmentTable& table,
              const Grammar& grammar);

  std::size_t size() const { return records_.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(coords_.rows()); }
  const Matrix& coords() const { return coords_; }
  Vector point(std::size_t i) const { return coords_.col(static_cast<Eigen::Index>(i)); }
  const std::vector<CompoundRecord>& records() const { return records_; }
  const CompoundRecord& record(std::size_t i) const { return records_[i]; }
  const CompoundProperties& properties(std::size_t i) const { return properties_[i]; }
  const KdTree& tree() const { return tree_; }

  std::vector<Neighbor> knn(const Vector& z, std::size_t n, std::optional<std::size_t> exclude = {}) const {
    return tree_.knn(z, n, exclude);
  }

  std::optional<std::size_t> find_id(const std::string& id) const;
  bool contains_smiles(const std::string& smiles) const { return smiles_.count(smiles) > 0; }
  bool contains_fingerprint(const Fingerprint& fp) const;

  /// Label -> record count, in label order.
  std::map<std::string, std::size_t> label_counts() const;

 private:
  Matrix coords_;
  std::vector<CompoundRecord> records_;
  std::vector<CompoundProperties> properties_;
  KdTree tree_;
  std::map<std::string, std::size_t> ids_;
  std::unordered_set<std::string> smiles_;
  std::multimap<std::size_t, std::size_t> fingerprint_buckets_;  // popcount -> record
};

/// Encodes every record with `encoder`; coordinates are rounded to float so a
/// saved index reloads bit-exactly. Throws std::invalid_argument on an empty
/// dataset and MoleculeError naming the row (1-based) of an invalid molecule.
LatentIndex build_index(std::vector<CompoundRecord> records, const ProjectionEncoder& encoder,
                        const FragmentTable& table, const Grammar& grammar);

/// Coordinate-wise mean of the points carrying `label`. Throws RequestError
/// naming the label when no record carries it.
Vector centroid(const LatentIndex& index, const std::string& label);

}  // namespace mantra
