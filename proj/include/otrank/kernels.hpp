#pragma once

// Positive definite kernels for the MMD statistics.

#include "otrank/types.hpp"

#include <string>

namespace otr {

struct Kernel {
  enum class Kind { Gaussian, Laplace, Distance };

  Kind kind = Kind::Gaussian;
  double sigma = 1.0;  // Gaussian/Laplace bandwidth
  double alpha = 1.0;  // Distance exponent, in (0,2)

  /// K(u,v) = exp(-sigma ||u - v||^2)
  static Kernel gaussian(double sigma);
  /// K(u,v) = exp(-sigma ||u - v||_1)
  static Kernel laplace(double sigma);
  /// K(u,v) = (||u||^a + ||v||^a - ||u - v||^a) / 2
  static Kernel distance(double alpha);

  static Kernel parse(const std::string& name, double parameter);

  double operator()(VectorRef u, VectorRef v) const;
  std::string describe() const;
};

/// The bandwidth convention sigma = 1/(4p), scale-matched to a standard
/// normal reference in dimension p.
inline double default_gaussian_bandwidth(int p) { return 1.0 / (4.0 * p); }

/// Gram-style sums evaluated exactly: sum over all ordered pairs (i, j) of
/// K(a_i, b_j) for rows of a and b.
double kernel_cross_sum(const Kernel& kernel, MatrixRef a, MatrixRef b);

/// Sum over ordered pairs with i != j of K(a_i, a_j).
double kernel_offdiag_sum(const Kernel& kernel, MatrixRef a);

}  // namespace otr
