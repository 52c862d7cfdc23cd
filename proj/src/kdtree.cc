#include "mantra/kdtree.h"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <utility>

namespace mantra {

double squared_distance(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    double t = a(i) - b(i);
    s += t * t;
  }
  return s;
}

KdTree::KdTree(Matrix points, std::size_t leaf_size) : points_(std::move(points)), leaf_size_(std::max<std::size_t>(1, leaf_size)) {
  order_.resize(size());
  for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
  if (!order_.empty()) build(0, order_.size());
}

std::size_t KdTree::build(std::size_t begin, std::size_t end) {
  std::size_t id = nodes_.size();
  nodes_.push_back(Node{begin, end});
  if (end - begin <= leaf_size_) return id;

  // Split on the widest coordinate at the median.
  Eigen::Index best = 0;
  double widest = -1.0;
  for (Eigen::Index k = 0; k < points_.rows(); ++k) {
    double lo = points_(k, order_[begin]), hi = lo;
    for (std::size_t i = begin; i < end; ++i) {
      lo = std::min(lo, points_(k, order_[i]));
      hi = std::max(hi, points_(k, order_[i]));
    }
    if (hi - lo > widest) {
      widest = hi - lo;
      best = k;
    }
  }
  if (widest <= 0.0) return id;

  std::size_t mid = begin + (end - begin) / 2;
  auto by_coord = [&](std::size_t a, std::size_t b) {
    return std::pair(points_(best, a), a) < std::pair(points_(best, b), b);
  };
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.end() - (order_.size() - end), by_coord);
  double split = points_(best, order_[mid]);
  std::size_t left = build(begin, mid);
  std::size_t right = build(mid, end);
  nodes_[id].split_dim = static_cast<int>(best);
  nodes_[id].split = split;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

std::vector<Neighbor> KdTree::knn(const Vector& query, std::size_t n, std::optional<std::size_t> exclude) const {
  if (static_cast<std::size_t>(query.size()) != dim()) throw std::invalid_argument("knn: query dimension mismatch");
  std::size_t available = size() - (exclude && *exclude < size() ? 1 : 0);
  if (n > available) {
    throw std::invalid_argument("knn: requested " + std::to_string(n) + " neighbours from " +
                                std::to_string(available) + " points");
  }
  std::vector<Neighbor> out;
  if (n == 0) return out;

  // Max-heap on (squared distance, index): the top is the worst kept candidate.
  std::priority_queue<std::pair<double, std::size_t>> best;
  auto offer = [&](std::size_t i) {
    if (exclude && *exclude == i) return;
    std::pair<double, std::size_t> c{squared_distance(query, points_.col(static_cast<Eigen::Index>(i))), i};
    if (best.size() < n) {
      best.push(c);
    } else if (c < best.top()) {
      best.pop();
      best.push(c);
    }
  };
  auto visit = [&](auto&& self, std::size_t id) -> void {
    const Node& node = nodes_[id];
    if (node.split_dim < 0) {
      for (std::size_t i = node.begin; i < node.end; ++i) offer(order_[i]);
      return;
    }
    double diff = query(node.split_dim) - node.split;
    std::size_t near = diff < 0.0 ? node.left : node.right;
    std::size_t far = diff < 0.0 ? node.right : node.left;
    self(self, near);
    // Equal bound still explored: a farther subtree may hold a lower-index tie.
    if (best.size() < n || diff * diff <= best.top().first) self(self, far);
  };
  visit(visit, 0);

  out.resize(best.size());
  for (std::size_t k = out.size(); k-- > 0;) {
    out[k] = Neighbor{best.top().second, std::sqrt(best.top().first)};
    best.pop();
  }
  return out;
}

}  // namespace mantra
