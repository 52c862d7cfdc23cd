#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "mantra/latent_space.h"

namespace mantra {

struct Neighbor {
  std::size_t index = 0;
  double distance = 0.0;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Sum of squared coordinate differences, accumulated in coordinate order.
double squared_distance(const Vector& a, const Vector& b);

/// Exact k-nearest-neighbour search over the columns of a d x N matrix.
class KdTree {
 public:
  KdTree() = default;
  explicit KdTree(Matrix points, std::size_t leaf_size = 8);

  std::size_t size() const { return static_cast<std::size_t>(points_.cols()); }
  std::size_t dim() const { return static_cast<std::size_t>(points_.rows()); }
  const Matrix& points() const { return points_; }

  /// The n nearest points ordered by (distance, index); `exclude` is skipped.
  /// Throws std::invalid_argument when fewer than n candidates exist.
  std::vector<Neighbor> knn(const Vector& query, std::size_t n, std::optional<std::size_t> exclude = {}) const;

 private:
  struct Node {
    std::size_t begin = 0, end = 0;  // range in order_
    int split_dim = -1;              // -1 for leaves
    double split = 0.0;
    std::size_t left = 0, right = 0;
  };

  std::size_t build(std::size_t begin, std::size_t end);

  Matrix points_;
  std::size_t leaf_size_ = 8;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace mantra
