#pragma once

// Empirical OT rank maps (two-sample pooled ranks) and OT sign / absolute
// rank / signed-rank maps (one-sample, group quotient). All of them solve
// one exact assignment on a quotient-cost matrix C_ij = c(X_i, h_j).

#include "otrank/groups.hpp"
#include "otrank/reference.hpp"
#include "otrank/types.hpp"

#include <utility>
#include <vector>

namespace otr {

struct RankAssignment {
  /// permutation[i] = grid index assigned to observation i.
  std::vector<int> permutation;
  /// Row i = absolute rank of X_i (a row of the grid).
  Matrix absolute_ranks;
  /// Q-hat per observation; applying signs[i] to absolute_ranks.row(i)
  /// gives signed_ranks.row(i).
  std::vector<GroupElement> signs;
  /// Row i = U-hat_i, the point of the absolute rank's orbit closest to X_i.
  Matrix signed_ranks;
  double total_cost = 0.0;
};

/// OT ranks with squared Euclidean cost. Equivalent to signed_rank_map under
/// the trivial group: all signs are the identity and signed = absolute ranks.
RankAssignment rank_map(MatrixRef sample, const ReferenceGrid& grid);

/// OT signs, absolute ranks, and signed-ranks for the group quotient cost
/// c(x,h) = min_Q ||Q'x - h||^2. The grid must be a fundamental domain for
/// the group (verified; violation throws). The RNG is consumed only when a
/// sign minimizer is not unique (e.g. the spherical group).
RankAssignment signed_rank_map(MatrixRef sample, const ReferenceGrid& grid,
                               const SymmetryGroup& group, Rng& rng);

/// Rank map on the row-concatenation of x (m rows) and y (n rows) against a
/// grid of m+n points; returns the two rank blocks in original row order.
std::pair<Matrix, Matrix> pooled_rank_map(MatrixRef x, MatrixRef y, const ReferenceGrid& grid);

/// Pairwise quotient costs C_ij = c(sample_i, grid_j).
Matrix quotient_cost_matrix(MatrixRef sample, const ReferenceGrid& grid, const SymmetryGroup& group);

}  // namespace otr
