#pragma once

// Exact dense linear assignment. Every empirical OT rank and signed-rank map
// in this library reduces to one call of solve_assignment on a quotient-cost
// matrix, so the solver must be exact: approximate transport would break the
// finite-sample distribution-free guarantees downstream.

#include "otrank/types.hpp"

#include <limits>
#include <vector>

namespace otr {

struct Assignment {
  /// permutation[i] = column assigned to row i (a bijection on 0..n-1).
  std::vector<int> permutation;
  /// Sum of the selected cost entries.
  double total_cost = 0.0;
};

/// Shortest-augmenting-path solver (Jonker-Volgenant style, dual potentials),
/// O(n^3) worst case. Returns a global minimizer; with ties, the first
/// optimum found by the deterministic search order. Comparisons are exact on
/// the computed costs; no epsilon thresholds.
///
/// Throws InvalidInput for non-square or non-finite input.
template <typename Scalar>
Assignment solve_assignment(const MatrixX<Scalar>& costs) {
  const Eigen::Index n = costs.rows();
  if (costs.cols() != n) throw InvalidInput("solve_assignment: cost matrix must be square");
  if (n == 0) return Assignment{{}, 0.0};
  if (!costs.allFinite()) throw InvalidInput("solve_assignment: cost matrix must be finite");

  const Scalar inf = std::numeric_limits<Scalar>::infinity();
  const int nn = static_cast<int>(n);

  // 1-indexed arrays with a virtual column 0 holding the row currently
  // being inserted; p[j] = row matched to column j.
  std::vector<Scalar> u(static_cast<std::size_t>(nn) + 1, Scalar(0));
  std::vector<Scalar> v(static_cast<std::size_t>(nn) + 1, Scalar(0));
  std::vector<int> p(static_cast<std::size_t>(nn) + 1, 0);
  std::vector<int> way(static_cast<std::size_t>(nn) + 1, 0);
  std::vector<Scalar> minv(static_cast<std::size_t>(nn) + 1);
  std::vector<char> used(static_cast<std::size_t>(nn) + 1);

  for (int i = 1; i <= nn; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), char(0));
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const int i0 = p[static_cast<std::size_t>(j0)];
      Scalar delta = inf;
      int j1 = -1;
      const Scalar ui0 = u[static_cast<std::size_t>(i0)];
      for (int j = 1; j <= nn; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const Scalar cur = costs(i0 - 1, j - 1) - ui0 - v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= nn; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<std::size_t>(j0)] != 0);
    // Augment along the alternating path back to the virtual column.
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }

  Assignment result;
  result.permutation.assign(static_cast<std::size_t>(nn), -1);
  for (int j = 1; j <= nn; ++j)
    result.permutation[static_cast<std::size_t>(p[static_cast<std::size_t>(j)] - 1)] = j - 1;
  double total = 0.0;
  for (int i = 0; i < nn; ++i)
    total += static_cast<double>(costs(i, result.permutation[static_cast<std::size_t>(i)]));
  result.total_cost = total;
  return result;
}

}  // namespace otr
