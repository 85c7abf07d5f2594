#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>

namespace otr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixRef = Eigen::Ref<const Matrix>;
using VectorRef = Eigen::Ref<const Vector>;

/// Deterministic RNG used throughout; always an explicit parameter so that
/// pipelines are replayable from a single seed.
using Rng = std::mt19937_64;

/// Malformed input: bad sizes, non-finite values, unparsable files. CLI exit code 2.
class InvalidInput : public std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Numerical failure: singular covariance, degenerate geometry. CLI exit code 3.
class NumericalError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// SplitMix64 mix of (master, stream). Per-replicate RNG streams are derived
/// with this so parallel replicates are order-independent.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace otr
