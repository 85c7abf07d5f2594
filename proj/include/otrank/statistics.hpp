#pragma once

// Test statistics: generalized Wilcoxon rank-sum, rank-kernel MMD, the
// signed-rank vector W_n and its quadratic form, the OT-MMD symmetry
// statistic T_n (Gaussian closed forms), the recentered MMD statistic for
// finite groups, Hotelling's T^2 baselines, score functions, and the
// effective reference distribution covariances.

#include "otrank/kernels.hpp"
#include "otrank/reference.hpp"
#include "otrank/transport.hpp"
#include "otrank/types.hpp"

#include <optional>
#include <string>

namespace otr {

struct ScoreFunction {
  enum class Kind { Identity, NormalCdf };
  Kind kind = Kind::Identity;

  static ScoreFunction identity() { return {Kind::Identity}; }
  static ScoreFunction normal_cdf() { return {Kind::NormalCdf}; }
  static ScoreFunction parse(const std::string& name);

  bool is_identity() const { return kind == Kind::Identity; }
  Vector operator()(VectorRef x) const;
  Matrix apply_rows(MatrixRef x) const;
  std::string describe() const;
};

struct ScoreCovariance {
  enum class Source { ClosedForm, MonteCarlo };
  Matrix matrix;  // p x p symmetric positive definite
  Source source = Source::ClosedForm;
  long long mc_draws = 0;
  double mc_max_se = 0.0;

  static ScoreCovariance closed_form(Matrix m);
};

/// Covariance of the effective reference distribution. Closed forms:
/// (Gaussian nu, identity) -> I; (Gaussian nu, normal-cdf) -> I/12;
/// (UniformCube nu, identity) -> I/12; any symmetrized Gaussian base with
/// identity score -> I. Throws for unsupported closed-form combinations.
ScoreCovariance erd_covariance_closed_form(GridGenerator nu, const ScoreFunction& score, int p,
                                           const std::optional<SymmetryGroup>& group = std::nullopt);

/// Monte Carlo fallback: covariance of J(H) (no group) or of S J(H) (group
/// set), with the largest entrywise standard error reported.
ScoreCovariance erd_covariance_monte_carlo(const SymmetrizedReference& ref, const ScoreFunction& score,
                                           long long m, Rng& rng);

/// Generalized Wilcoxon rank-sum statistic
/// T = mn/(m+n) * Delta' Sigma^-1 Delta, Delta = mean J(x_ranks) - mean J(y_ranks).
double ranksum_stat(MatrixRef x_ranks, MatrixRef y_ranks, const ScoreFunction& score,
                    const ScoreCovariance& sigma_erd);

/// Rank kernel MMD statistic gamma = mn/(m+n) [w1 + w2 - b]; the within-group
/// terms are U-statistic means (i != j, denominators m(m-1) and n(n-1)), the
/// cross term is 2/(mn) times the full double sum. The finite-sample sign is
/// not guaranteed; only a lower bound from the removed diagonals applies (see
/// rank_mmd_lower_bound).
double rank_mmd_stat(MatrixRef x_ranks, MatrixRef y_ranks, const ScoreFunction& score,
                     const Kernel& kernel);

/// -(m+n) * max diagonal correction; gamma can not fall below this.
double rank_mmd_lower_bound(Eigen::Index m, Eigen::Index n, const Kernel& kernel, MatrixRef x_ranks,
                            MatrixRef y_ranks, const ScoreFunction& score);

/// W_n = n^{-1/2} sum_i S_n(X_i) J(R_n(X_i)). Non-identity scores are
/// restricted to groups acting componentwise (trivial, central, sign,
/// permutation); other groups throw.
Vector signed_rank_stat(const RankAssignment& assignment, const SymmetryGroup& group,
                        const ScoreFunction& score);

/// The rejection statistic W' Sigma_ERD1^-1 W.
double signed_rank_quadform(VectorRef w, const ScoreCovariance& sigma_erd1);

/// T_n = MMD^2(empirical law of signed-ranks, nu_S) for the Gaussian kernel
/// and nu_S = N(0, I_p), where both expectation terms have closed forms.
double symmetry_mmd_stat(MatrixRef signed_ranks, double sigma);

/// Monte Carlo fallback for other kernels / other nu_S: the two expectation
/// terms are estimated from m draws of the symmetrized reference.
double symmetry_mmd_stat_mc(MatrixRef signed_ranks, const Kernel& kernel,
                            const SymmetrizedReference& nu_s, long long m, Rng& rng);

/// Closed-form Gaussian expectations under nu_S = N(0, I_p):
/// E_U K(u, U) = (2 sigma + 1)^{-p/2} exp(-sigma/(2 sigma+1) u'u).
double gaussian_mean_embedding(VectorRef u, double sigma);
/// E K(U, U') = (4 sigma + 1)^{-p/2}.
double gaussian_pair_expectation(double sigma, int p);

/// Precomputed evaluator for n MMD^2(empirical law of signed-ranks, nu_{n,S})
/// with a finite group: nu_{n,S} is the uniform law over the n|G| atoms
/// {Q h_j}. Supported orders: central/reflection 2, sign 2^p (p <= 12),
/// permutation p! (p <= 7); infinite groups throw.
class RecenteredMmd {
 public:
  RecenteredMmd(const ReferenceGrid& grid, const SymmetryGroup& group, Kernel kernel);

  /// n * MMD^2 against nu_{n,S} for arbitrary signed-rank rows.
  double operator()(MatrixRef signed_ranks) const;

  const Matrix& atoms() const { return atoms_; }

 private:
  Kernel kernel_;
  Matrix atoms_;          // (n|G|) x p symmetrized support
  double atom_self_mean_; // mean of K over atom pairs
};

/// Convenience wrapper constructing the evaluator once.
double recentered_mmd_stat(MatrixRef signed_ranks, const Kernel& kernel, const ReferenceGrid& grid,
                           const SymmetryGroup& group);

/// Two-sample Hotelling T^2 with the covariance of the pooled data:
/// T = mn/(m+n) (xbar - ybar)' S^-1 (xbar - ybar).
double hotelling_two_sample(MatrixRef x, MatrixRef y);

/// One-sample Hotelling T^2 = n xbar' S^-1 xbar, S with divisor n-1.
double hotelling_one_sample(MatrixRef x);

/// Solves A z = b for symmetric positive definite A, with a condition-number
/// guard (throws NumericalError above 1e12).
Vector spd_solve(const Matrix& a, VectorRef b);

}  // namespace otr
