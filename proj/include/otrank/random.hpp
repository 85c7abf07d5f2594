#pragma once

// Sampling helpers shared by grid construction, group operations and the
// simulation harness. All draws consume a caller-provided Rng.

#include "otrank/types.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace otr {

inline double standard_normal(Rng& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  return dist(rng);
}

inline double uniform01(Rng& rng) {
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  return dist(rng);
}

inline Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = dist(rng);
  return out;
}

inline Matrix uniform_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  Matrix out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = dist(rng);
  return out;
}

/// Uniform point on the unit sphere in R^p.
inline Vector sphere_point(Eigen::Index p, Rng& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Vector z(p);
  double norm2 = 0.0;
  do {
    for (Eigen::Index j = 0; j < p; ++j) z[j] = dist(rng);
    norm2 = z.squaredNorm();
  } while (norm2 == 0.0);
  return z / std::sqrt(norm2);
}

/// Haar-uniform orthogonal matrix, via QR of a Gaussian matrix with the
/// sign correction of Mezzadri (2007).
inline Matrix haar_orthogonal(Eigen::Index p, Rng& rng) {
  if (p == 0) return Matrix(0, 0);
  Matrix z = gaussian_matrix(p, p, rng);
  Eigen::HouseholderQR<Matrix> qr(z);
  Matrix q = qr.householderQ();
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < p; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

inline std::vector<int> identity_permutation(int n) {
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  return idx;
}

/// Fisher-Yates shuffle of 0..n-1.
inline std::vector<int> random_permutation(int n, Rng& rng) {
  std::vector<int> idx = identity_permutation(n);
  for (int i = n - 1; i > 0; --i) {
    std::uniform_int_distribution<int> dist(0, i);
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(dist(rng))]);
  }
  return idx;
}

/// k indices sampled without replacement from 0..n-1 (partial Fisher-Yates).
inline std::vector<int> sample_without_replacement(int n, int k, Rng& rng) {
  std::vector<int> idx = identity_permutation(n);
  for (int i = 0; i < k; ++i) {
    std::uniform_int_distribution<int> dist(i, n - 1);
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(dist(rng))]);
  }
  idx.resize(static_cast<std::size_t>(k));
  return idx;
}

}  // namespace otr
