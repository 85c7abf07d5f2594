#pragma once

// Reference grids {h_1,...,h_n} discretizing a reference distribution nu,
// including fundamental-domain grids (no two rows on the same group orbit)
// and the center-outward regular grid.

#include "otrank/groups.hpp"
#include "otrank/types.hpp"

#include <optional>
#include <string>

namespace otr {

enum class GridGenerator {
  Gaussian,         // i.i.d. N(0, I_p)
  UniformCube,      // i.i.d. Unif([0,1]^p)
  SphericalUniform, // R * S with R ~ Unif[0,1], S uniform on the unit sphere
  ChiNormAxis,      // rows (||Z||, 0, ..., 0), Z ~ N(0, I_p)
  SortedGaussian,   // N(0, I_p) draws sorted ascending within each row
  CenterOutward,    // regular radial/directional grid (see center_outward_grid)
  Custom,           // loaded from file
};

std::string to_string(GridGenerator gen);
GridGenerator parse_grid_generator(const std::string& text);

struct ReferenceGrid {
  Matrix points;  // n x p, rows pairwise distinct
  GridGenerator generator = GridGenerator::Custom;
  std::uint64_t seed = 0;
  std::optional<GroupKind> fundamental_domain_for;

  Eigen::Index size() const { return points.rows(); }
  Eigen::Index dim() const { return points.cols(); }
};

/// n i.i.d. draws from the named reference distribution, fixed by seed.
/// Duplicate rows (probability zero) trigger one regeneration, then failure.
ReferenceGrid make_grid(GridGenerator gen, int n, int p, std::uint64_t seed);

/// The regular grid of Hallin et al.: n_S unit directions (regular angles for
/// p = 2, a deterministic low-discrepancy construction for p >= 3) scaled by
/// radii r/(n_R+1), r = 1..n_R, plus n_0 extras drawn without replacement
/// from {s / (2(n_R+1))}. Total size n_R*n_S + n_0.
ReferenceGrid center_outward_grid(int n_r, int n_s, int n_0, int p, std::uint64_t seed);

/// Factorizes n = n_R n_S + n_0 with n_S ~ sqrt(n) and builds the grid.
ReferenceGrid center_outward_grid_auto(int n, int p, std::uint64_t seed);

/// Smallest pairwise quotient cost min_{i != j} c(h_i, h_j); positive iff the
/// grid is a fundamental domain for the group (Assumption on nu vs G).
double min_pairwise_orbit_cost(const ReferenceGrid& grid, const SymmetryGroup& group);

/// Throws InvalidInput when two grid rows lie on the same orbit.
void verify_fundamental_domain(const ReferenceGrid& grid, const SymmetryGroup& group);

/// CSV import/export, header "h1,...,hp".
void export_grid_csv(const ReferenceGrid& grid, const std::string& path);
ReferenceGrid import_grid_csv(const std::string& path);

/// nu_S (or its empirical version): the law of S H with S ~ Uniform(G) and H
/// from either a fixed grid or an analytic generator.
struct SymmetrizedReference {
  std::optional<ReferenceGrid> base_grid;         // empirical base if set
  std::optional<GridGenerator> base_generator;    // analytic base otherwise
  int p = 0;
  SymmetryGroup group;

  static SymmetrizedReference from_grid(ReferenceGrid grid, SymmetryGroup g);
  static SymmetrizedReference from_generator(GridGenerator gen, int p, SymmetryGroup g);
};

/// One draw S H from the symmetrized reference.
Vector sample_symmetrized(const SymmetrizedReference& ref, Rng& rng);

struct MomentEstimate {
  Vector mean;
  Vector mean_se;      // per-coordinate standard error of the mean
  Matrix covariance;   // sample covariance (divisor m-1)
  long long draws = 0;
};

/// Monte Carlo mean/covariance of S J(H)-style draws (J applied by caller via
/// the base); serves Sigma_ERD1 and nu_S expectations with no closed form.
MomentEstimate symmetrized_moments(const SymmetrizedReference& ref, long long m, Rng& rng);

}  // namespace otr
