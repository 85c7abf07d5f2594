#include "otrank/transport.hpp"

#include "otrank/assignment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iostream>
#include <numeric>

namespace otr {

namespace {

void check_sample(MatrixRef sample, const ReferenceGrid& grid) {
  if (sample.rows() != grid.size())
    throw InvalidInput("transport: sample size " + std::to_string(sample.rows()) +
                       " does not match grid size " + std::to_string(grid.size()));
  if (sample.cols() != grid.dim())
    throw InvalidInput("transport: sample dimension " + std::to_string(sample.cols()) +
                       " does not match grid dimension " + std::to_string(grid.dim()));
  if (!sample.allFinite()) throw InvalidInput("transport: sample must be finite");
  // Ties have probability zero for continuous data; reject rather than jitter.
  std::vector<int> idx(static_cast<std::size_t>(sample.rows()));
  std::iota(idx.begin(), idx.end(), 0);
  auto row_less = [&](int a, int b) {
    for (Eigen::Index j = 0; j < sample.cols(); ++j) {
      if (sample(a, j) < sample(b, j)) return true;
      if (sample(a, j) > sample(b, j)) return false;
    }
    return false;
  };
  std::sort(idx.begin(), idx.end(), row_less);
  for (std::size_t k = 1; k < idx.size(); ++k)
    if (sample.row(idx[k - 1]) == sample.row(idx[k]))
      throw InvalidInput("transport: duplicate sample rows " + std::to_string(idx[k - 1]) + " and " +
                         std::to_string(idx[k]) + " (consider --jitter for tied data)");
}

}  // namespace

Matrix quotient_cost_matrix(MatrixRef sample, const ReferenceGrid& grid, const SymmetryGroup& group) {
  const Eigen::Index n = sample.rows();
  Matrix costs(n, grid.size());
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < grid.size(); ++j)
      costs(i, j) = orbit_cost(group, sample.row(i), grid.points.row(j));
  return costs;
}

RankAssignment signed_rank_map(MatrixRef sample, const ReferenceGrid& grid,
                               const SymmetryGroup& group, Rng& rng) {
  check_sample(sample, grid);
  if (group.dim() != static_cast<int>(sample.cols()))
    throw InvalidInput("transport: group dimension mismatch");
  double sep = min_pairwise_orbit_cost(grid, group);
  if (!(sep > 0.0) && grid.size() > 1)
    throw InvalidInput("transport: reference grid violates the fundamental-domain assumption for group " +
                       to_string(group.kind()) + ": two rows share an orbit");
  if (std::sqrt(sep) < 1e-8 && grid.size() > 1) {
    static std::atomic<bool> warned{false};
    if (!warned.exchange(true))
      std::cerr << "otrank: warning: grid orbits nearly coincide (min pairwise orbit distance "
                << std::sqrt(sep) << "); ranks may be ill-conditioned\n";
  }

  Matrix costs = quotient_cost_matrix(sample, grid, group);
  Assignment assignment = solve_assignment<double>(costs);

  const Eigen::Index n = sample.rows();
  RankAssignment result;
  result.permutation = assignment.permutation;
  result.total_cost = assignment.total_cost;
  result.absolute_ranks.resize(n, grid.dim());
  result.signed_ranks.resize(n, grid.dim());
  result.signs.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const int j = result.permutation[static_cast<std::size_t>(i)];
    result.absolute_ranks.row(i) = grid.points.row(j);
    result.signs.push_back(argmin_sign(group, sample.row(i), grid.points.row(j), rng));
    result.signed_ranks.row(i) =
        closest_orbit_point(group, sample.row(i), grid.points.row(j)).transpose();
  }
  return result;
}

RankAssignment rank_map(MatrixRef sample, const ReferenceGrid& grid) {
  SymmetryGroup trivial = SymmetryGroup::trivial(static_cast<int>(sample.cols()));
  Rng unused(0);  // the trivial group consumes no randomness
  return signed_rank_map(sample, grid, trivial, unused);
}

std::pair<Matrix, Matrix> pooled_rank_map(MatrixRef x, MatrixRef y, const ReferenceGrid& grid) {
  if (x.cols() != y.cols()) throw InvalidInput("pooled_rank_map: sample dimensions differ");
  const Eigen::Index m = x.rows(), n = y.rows();
  Matrix pooled(m + n, x.cols());
  pooled.topRows(m) = x;
  pooled.bottomRows(n) = y;
  RankAssignment ranks = rank_map(pooled, grid);
  return {ranks.absolute_ranks.topRows(m), ranks.absolute_ranks.bottomRows(n)};
}

}  // namespace otr
