#pragma once

// End-to-end test procedures shared by the CLI and the scenario harness:
// data in, transport, statistic, calibration, TestReport out.

#include "otrank/calibration.hpp"
#include "otrank/report.hpp"

#include <optional>
#include <string>

namespace otr {

struct PipelineOptions {
  GridGenerator reference = GridGenerator::Gaussian;
  std::optional<ReferenceGrid> custom_grid;  // overrides `reference` when set
  ScoreFunction score = ScoreFunction::identity();
  std::optional<Kernel> kernel;           // default: gaussian with sigma = 1/(4p)
  int replicates = 999;                   // Monte Carlo null size
  std::uint64_t seed = 0;
  CalibrationMode calibration = CalibrationMode::MonteCarlo;
  int threads = 1;
  std::optional<std::string> cache_dir;   // null-sample cache; unset = no cache
  bool no_cache = false;
  double jitter = 0.0;                    // optional tie-breaking noise amplitude
};

/// Generalized Wilcoxon rank-sum test on two samples (pooled OT ranks).
TestReport run_ranksum(MatrixRef x, MatrixRef y, const PipelineOptions& options);

/// Rank kernel MMD two-sample test.
TestReport run_rank_mmd(MatrixRef x, MatrixRef y, const PipelineOptions& options);

/// Generalized Wilcoxon signed-rank test for G-symmetry / one-sample location.
TestReport run_signedrank(MatrixRef x, const SymmetryGroup& group, const PipelineOptions& options);

/// OT-MMD test for G-symmetry (statistic T_n).
TestReport run_symmetry_mmd(MatrixRef x, const SymmetryGroup& group, const PipelineOptions& options);

/// Hotelling T^2, one- or two-sample, asymptotic chi-squared calibration.
TestReport run_hotelling(MatrixRef x, const std::optional<Matrix>& y, const PipelineOptions& options);

/// Reference grid for a one-sample symmetry test: the generator default
/// depends on the group (chi_norm_axis for spherical, sorted_gaussian for
/// permutation, gaussian otherwise), so that nu_S = N(0, I_p).
GridGenerator default_reference_for(const SymmetryGroup& group);

/// Adds uniform(-eps, eps) noise to break ties; identity when eps = 0.
Matrix apply_jitter(MatrixRef sample, double eps, Rng& rng);

}  // namespace otr
