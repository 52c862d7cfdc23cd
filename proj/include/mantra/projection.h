#pragma once

#include "mantra/latent_space.h"

namespace mantra {

struct Projection {
  Matrix xy;              // 2 x N
  Matrix components;      // d x 2, unit columns
  Vector mean;            // d
  double variance[2] = {0.0, 0.0};
};

/// Top two principal components of the columns of `points` (d x N), from the
/// population covariance. Each component's largest-magnitude loading is made
/// positive (first index on ties). Missing components are zero.
Projection pca_2d(const Matrix& points);

}  // namespace mantra
