#include "mantra/projection.h"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace mantra {

Projection pca_2d(const Matrix& points) {
  const Eigen::Index d = points.rows(), n = points.cols();
  Projection p;
  p.mean = n > 0 ? Vector(points.rowwise().mean()) : Vector::Zero(d);
  p.components = Matrix::Zero(d, 2);
  p.xy = Matrix::Zero(2, n);
  if (n == 0 || d == 0) return p;
  Matrix centered = points.colwise() - p.mean;
  Matrix cov = centered * centered.transpose() / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  // eigenvalues ascending
  for (Eigen::Index c = 0; c < std::min<Eigen::Index>(2, d); ++c) {
    Eigen::Index src = d - 1 - c;
    Vector v = eig.eigenvectors().col(src);
    Eigen::Index arg = 0;
    for (Eigen::Index i = 1; i < d; ++i) {
      if (std::abs(v(i)) > std::abs(v(arg))) arg = i;
    }
    if (v(arg) < 0) v = -v;
    p.components.col(c) = v;
    p.variance[c] = std::max(0.0, eig.eigenvalues()(src));
  }
  p.xy = p.components.transpose() * centered;
  return p;
}

}  // namespace mantra
