#include "otrank/kernels.hpp"

#include <cmath>

namespace otr {

Kernel Kernel::gaussian(double sigma) {
  if (!(sigma > 0.0)) throw InvalidInput("kernel: gaussian bandwidth must be positive");
  return Kernel{Kind::Gaussian, sigma, 1.0};
}

Kernel Kernel::laplace(double sigma) {
  if (!(sigma > 0.0)) throw InvalidInput("kernel: laplace bandwidth must be positive");
  return Kernel{Kind::Laplace, sigma, 1.0};
}

Kernel Kernel::distance(double alpha) {
  if (!(alpha > 0.0 && alpha < 2.0)) throw InvalidInput("kernel: distance exponent must be in (0,2)");
  return Kernel{Kind::Distance, 1.0, alpha};
}

Kernel Kernel::parse(const std::string& name, double parameter) {
  if (name == "gaussian") return gaussian(parameter);
  if (name == "laplace") return laplace(parameter);
  if (name == "distance") return distance(parameter);
  throw InvalidInput("kernel: unknown kernel '" + name + "'");
}

double Kernel::operator()(VectorRef u, VectorRef v) const {
  switch (kind) {
    case Kind::Gaussian: return std::exp(-sigma * (u - v).squaredNorm());
    case Kind::Laplace: return std::exp(-sigma * (u - v).lpNorm<1>());
    case Kind::Distance:
      return 0.5 * (std::pow(u.norm(), alpha) + std::pow(v.norm(), alpha) -
                    std::pow((u - v).norm(), alpha));
  }
  return 0.0;
}

std::string Kernel::describe() const {
  switch (kind) {
    case Kind::Gaussian: return "gaussian(sigma=" + std::to_string(sigma) + ")";
    case Kind::Laplace: return "laplace(sigma=" + std::to_string(sigma) + ")";
    case Kind::Distance: return "distance(alpha=" + std::to_string(alpha) + ")";
  }
  return "?";
}

namespace {

// Pair evaluation on matrix rows without routing through Ref (which would
// copy strided rows on every call).
template <typename RowA, typename RowB>
double eval_rows(const Kernel& k, const RowA& u, const RowB& v) {
  switch (k.kind) {
    case Kernel::Kind::Gaussian: return std::exp(-k.sigma * (u - v).squaredNorm());
    case Kernel::Kind::Laplace: return std::exp(-k.sigma * (u - v).template lpNorm<1>());
    case Kernel::Kind::Distance:
      return 0.5 * (std::pow(u.norm(), k.alpha) + std::pow(v.norm(), k.alpha) -
                    std::pow((u - v).norm(), k.alpha));
  }
  return 0.0;
}

}  // namespace

double kernel_cross_sum(const Kernel& kernel, MatrixRef a, MatrixRef b) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.rows(); ++j) total += eval_rows(kernel, a.row(i), b.row(j));
  return total;
}

double kernel_offdiag_sum(const Kernel& kernel, MatrixRef a) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = i + 1; j < a.rows(); ++j) total += eval_rows(kernel, a.row(i), a.row(j));
  return 2.0 * total;
}

}  // namespace otr
