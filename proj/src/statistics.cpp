#include "otrank/statistics.hpp"

#include "otrank/special.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace otr {

ScoreFunction ScoreFunction::parse(const std::string& name) {
  if (name == "identity") return identity();
  if (name == "normal_cdf") return normal_cdf();
  throw InvalidInput("score: unknown score function '" + name + "'");
}

Vector ScoreFunction::operator()(VectorRef x) const {
  if (kind == Kind::Identity) return x;
  Vector out(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) out[j] = otr::normal_cdf(x[j]);
  return out;
}

Matrix ScoreFunction::apply_rows(MatrixRef x) const {
  if (kind == Kind::Identity) return x;
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j) out(i, j) = otr::normal_cdf(x(i, j));
  return out;
}

std::string ScoreFunction::describe() const {
  return kind == Kind::Identity ? "identity" : "normal_cdf";
}

ScoreCovariance ScoreCovariance::closed_form(Matrix m) {
  return ScoreCovariance{std::move(m), Source::ClosedForm, 0, 0.0};
}

ScoreCovariance erd_covariance_closed_form(GridGenerator nu, const ScoreFunction& score, int p,
                                           const std::optional<SymmetryGroup>& group) {
  if (p < 1) throw InvalidInput("erd_covariance: dimension must be >= 1");
  if (group) {
    // ERD1 = law of S J(H). Closed forms exist where the symmetrized
    // reference is exactly N(0, I): a Gaussian base under any of the groups
    // (rotations, signs and permutations all preserve N(0, I)), the
    // chi-norm-axis base under the spherical group, and the sorted-Gaussian
    // base under the permutation group. A uniform-cube base under the sign
    // group gives the Unif[-1,1]^p reference with covariance I/3.
    if (score.is_identity()) {
      const bool standard_normal_ref =
          nu == GridGenerator::Gaussian ||
          (nu == GridGenerator::ChiNormAxis && group->kind() == GroupKind::Spherical) ||
          (nu == GridGenerator::SortedGaussian && group->kind() == GroupKind::Permutation);
      if (standard_normal_ref) return ScoreCovariance::closed_form(Matrix::Identity(p, p));
      const bool uniform_sym_ref =
          nu == GridGenerator::UniformCube &&
          (group->kind() == GroupKind::Sign ||
           (group->kind() == GroupKind::Central && p == 1));
      if (uniform_sym_ref) return ScoreCovariance::closed_form(Matrix::Identity(p, p) / 3.0);
    }
    throw InvalidInput("erd_covariance: no closed form for ERD1 with nu = " + to_string(nu) +
                       ", score = " + score.describe() + ", group = " + group->describe() +
                       "; use Monte Carlo mode");
  }
  if (nu == GridGenerator::Gaussian && score.is_identity())
    return ScoreCovariance::closed_form(Matrix::Identity(p, p));
  if (nu == GridGenerator::Gaussian && score.kind == ScoreFunction::Kind::NormalCdf)
    return ScoreCovariance::closed_form(Matrix::Identity(p, p) / 12.0);
  if (nu == GridGenerator::UniformCube && score.is_identity())
    return ScoreCovariance::closed_form(Matrix::Identity(p, p) / 12.0);
  throw InvalidInput("erd_covariance: no closed form for nu = " + to_string(nu) + ", score = " +
                     score.describe() + "; use Monte Carlo mode");
}

ScoreCovariance erd_covariance_monte_carlo(const SymmetrizedReference& ref, const ScoreFunction& score,
                                           long long m, Rng& rng) {
  if (m < 2) throw InvalidInput("erd_covariance: Monte Carlo mode needs m >= 2");
  const int p = ref.p;
  Vector sum = Vector::Zero(p);
  Matrix outer = Matrix::Zero(p, p);
  Matrix fourth = Matrix::Zero(p, p);  // accumulates (u u')^2 entrywise for SEs
  for (long long k = 0; k < m; ++k) {
    Vector u = score(sample_symmetrized(ref, rng));
    sum += u;
    Matrix uu = u * u.transpose();
    outer += uu;
    fourth += uu.cwiseProduct(uu);
  }
  const double md = static_cast<double>(m);
  Vector mean = sum / md;
  ScoreCovariance cov;
  cov.matrix = (outer - md * mean * mean.transpose()) / (md - 1.0);
  cov.source = ScoreCovariance::Source::MonteCarlo;
  cov.mc_draws = m;
  // SE of each second-moment entry; dominates the covariance SE for centered laws.
  Matrix second = outer / md;
  Matrix var_entry = fourth / md - second.cwiseProduct(second);
  cov.mc_max_se = std::sqrt(std::max(0.0, var_entry.maxCoeff()) / md);
  return cov;
}

Vector spd_solve(const Matrix& a, VectorRef b) {
  if (a.rows() != a.cols() || a.rows() != b.size())
    throw InvalidInput("spd_solve: dimension mismatch");
  Eigen::SelfAdjointEigenSolver<Matrix> eigen(a);
  if (eigen.info() != Eigen::Success) throw NumericalError("spd_solve: eigendecomposition failed");
  const double max_ev = eigen.eigenvalues().maxCoeff();
  const double min_ev = eigen.eigenvalues().minCoeff();
  if (!(min_ev > 0.0) || max_ev / min_ev > 1e12)
    throw NumericalError("spd_solve: matrix is singular or ill-conditioned (condition number > 1e12)");
  return eigen.eigenvectors() *
         (eigen.eigenvectors().transpose() * b).cwiseQuotient(eigen.eigenvalues());
}

double ranksum_stat(MatrixRef x_ranks, MatrixRef y_ranks, const ScoreFunction& score,
                    const ScoreCovariance& sigma_erd) {
  if (x_ranks.cols() != y_ranks.cols()) throw InvalidInput("ranksum_stat: dimension mismatch");
  const double m = static_cast<double>(x_ranks.rows());
  const double n = static_cast<double>(y_ranks.rows());
  if (m < 1 || n < 1) throw InvalidInput("ranksum_stat: empty sample");
  Vector delta = score.apply_rows(x_ranks).colwise().mean().transpose() -
                 score.apply_rows(y_ranks).colwise().mean().transpose();
  return m * n / (m + n) * delta.dot(spd_solve(sigma_erd.matrix, delta));
}

double rank_mmd_stat(MatrixRef x_ranks, MatrixRef y_ranks, const ScoreFunction& score,
                     const Kernel& kernel) {
  const Eigen::Index m = x_ranks.rows(), n = y_ranks.rows();
  if (m < 2 || n < 2) throw InvalidInput("rank_mmd_stat: both samples need at least 2 points");
  if (x_ranks.cols() != y_ranks.cols()) throw InvalidInput("rank_mmd_stat: dimension mismatch");
  Matrix jx = score.apply_rows(x_ranks);
  Matrix jy = score.apply_rows(y_ranks);
  const double md = static_cast<double>(m), nd = static_cast<double>(n);
  double w1 = kernel_offdiag_sum(kernel, jx) / (md * (md - 1.0));
  double w2 = kernel_offdiag_sum(kernel, jy) / (nd * (nd - 1.0));
  double b = 2.0 / (md * nd) * kernel_cross_sum(kernel, jx, jy);
  return md * nd / (md + nd) * (w1 + w2 - b);
}

double rank_mmd_lower_bound(Eigen::Index m, Eigen::Index n, const Kernel& kernel, MatrixRef x_ranks,
                            MatrixRef y_ranks, const ScoreFunction& score) {
  // gamma >= -(mn/(m+n)) * (max diag / (m-1) + max diag / (n-1)); for
  // bounded kernels the diagonal is K(u,u).
  double max_diag = 0.0;
  Matrix jx = score.apply_rows(x_ranks);
  Matrix jy = score.apply_rows(y_ranks);
  for (Eigen::Index i = 0; i < jx.rows(); ++i)
    max_diag = std::max(max_diag, kernel(jx.row(i), jx.row(i)));
  for (Eigen::Index i = 0; i < jy.rows(); ++i)
    max_diag = std::max(max_diag, kernel(jy.row(i), jy.row(i)));
  const double md = static_cast<double>(m), nd = static_cast<double>(n);
  return -(md * nd / (md + nd)) * max_diag * (1.0 / (md - 1.0) + 1.0 / (nd - 1.0));
}

Vector signed_rank_stat(const RankAssignment& assignment, const SymmetryGroup& group,
                        const ScoreFunction& score) {
  const Eigen::Index n = assignment.signed_ranks.rows();
  if (n < 1) throw InvalidInput("signed_rank_stat: empty assignment");
  if (score.is_identity()) {
    // S_n(X_i) R_n(X_i) is exactly the signed-rank row.
    return assignment.signed_ranks.colwise().sum().transpose() / std::sqrt(static_cast<double>(n));
  }
  switch (group.kind()) {
    case GroupKind::Trivial:
    case GroupKind::Central:
    case GroupKind::Sign:
    case GroupKind::Permutation:
      break;
    default:
      throw InvalidInput(
          "signed_rank_stat: non-identity scores require a componentwise-acting group "
          "(trivial, central, sign, permutation)");
  }
  Vector total = Vector::Zero(assignment.signed_ranks.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    Vector scored = score(assignment.absolute_ranks.row(i));
    total += apply(group, assignment.signs[static_cast<std::size_t>(i)], scored);
  }
  return total / std::sqrt(static_cast<double>(n));
}

double signed_rank_quadform(VectorRef w, const ScoreCovariance& sigma_erd1) {
  return w.dot(spd_solve(sigma_erd1.matrix, w));
}

double gaussian_mean_embedding(VectorRef u, double sigma) {
  const double p = static_cast<double>(u.size());
  return std::pow(2.0 * sigma + 1.0, -0.5 * p) *
         std::exp(-sigma / (2.0 * sigma + 1.0) * u.squaredNorm());
}

double gaussian_pair_expectation(double sigma, int p) {
  return std::pow(4.0 * sigma + 1.0, -0.5 * p);
}

double symmetry_mmd_stat(MatrixRef signed_ranks, double sigma) {
  if (!(sigma > 0.0)) throw InvalidInput("symmetry_mmd_stat: bandwidth must be positive");
  const Eigen::Index n = signed_ranks.rows();
  if (n < 1) throw InvalidInput("symmetry_mmd_stat: empty input");
  const int p = static_cast<int>(signed_ranks.cols());
  Kernel kernel = Kernel::gaussian(sigma);
  double pair_sum = kernel_offdiag_sum(kernel, signed_ranks) + static_cast<double>(n);  // diag K = 1
  double embed_sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    embed_sum += gaussian_mean_embedding(signed_ranks.row(i), sigma);
  const double nd = static_cast<double>(n);
  return pair_sum / (nd * nd) + gaussian_pair_expectation(sigma, p) - 2.0 / nd * embed_sum;
}

double symmetry_mmd_stat_mc(MatrixRef signed_ranks, const Kernel& kernel,
                            const SymmetrizedReference& nu_s, long long m, Rng& rng) {
  if (m < 2) throw InvalidInput("symmetry_mmd_stat_mc: need m >= 2 draws");
  const Eigen::Index n = signed_ranks.rows();
  if (n < 1) throw InvalidInput("symmetry_mmd_stat_mc: empty input");
  Matrix draws(m, nu_s.p);
  for (long long k = 0; k < m; ++k) draws.row(k) = sample_symmetrized(nu_s, rng).transpose();
  double pair_sum = kernel_offdiag_sum(kernel, signed_ranks);
  for (Eigen::Index i = 0; i < n; ++i) pair_sum += kernel(signed_ranks.row(i), signed_ranks.row(i));
  // E K(U,U') from off-diagonal pairs of the draws; E_U K(u_i, U) from all draws.
  const double md = static_cast<double>(m);
  double pair_expect = kernel_offdiag_sum(kernel, draws) / (md * (md - 1.0));
  double cross = kernel_cross_sum(kernel, signed_ranks, draws) / md;  // = sum_i E-hat K(u_i, U)
  const double nd = static_cast<double>(n);
  return pair_sum / (nd * nd) + pair_expect - 2.0 / nd * cross;
}

namespace {

void enumerate_elements(const SymmetryGroup& g, std::vector<GroupElement>& out) {
  switch (g.kind()) {
    case GroupKind::Trivial: {
      GroupElement e;
      e.kind = g.kind();
      out.push_back(e);
      return;
    }
    case GroupKind::Central: {
      for (double s : {1.0, -1.0}) {
        GroupElement e;
        e.kind = g.kind();
        e.central_sign = s;
        out.push_back(e);
      }
      return;
    }
    case GroupKind::Reflection: {
      for (bool r : {false, true}) {
        GroupElement e;
        e.kind = g.kind();
        e.reflected = r;
        out.push_back(e);
      }
      return;
    }
    case GroupKind::Sign: {
      if (g.dim() > 12)
        throw InvalidInput("recentered_mmd: sign group enumeration limited to p <= 12");
      const int p = g.dim();
      for (long long mask = 0; mask < (1LL << p); ++mask) {
        GroupElement e;
        e.kind = g.kind();
        e.signs.resize(p);
        for (int j = 0; j < p; ++j) e.signs[j] = (mask >> j) & 1 ? -1.0 : 1.0;
        out.push_back(std::move(e));
      }
      return;
    }
    case GroupKind::Permutation: {
      if (g.dim() > 7)
        throw InvalidInput("recentered_mmd: permutation group enumeration limited to p <= 7");
      std::vector<int> perm(static_cast<std::size_t>(g.dim()));
      std::iota(perm.begin(), perm.end(), 0);
      do {
        GroupElement e;
        e.kind = g.kind();
        e.perm = perm;
        out.push_back(std::move(e));
      } while (std::next_permutation(perm.begin(), perm.end()));
      return;
    }
    default:
      throw InvalidInput("recentered_mmd: group must be finite (central, sign, permutation, reflection)");
  }
}

}  // namespace

RecenteredMmd::RecenteredMmd(const ReferenceGrid& grid, const SymmetryGroup& group, Kernel kernel)
    : kernel_(kernel) {
  if (grid.dim() != group.dim()) throw InvalidInput("recentered_mmd: grid/group dimension mismatch");
  std::vector<GroupElement> elements;
  enumerate_elements(group, elements);
  const Eigen::Index n = grid.size();
  const Eigen::Index order = static_cast<Eigen::Index>(elements.size());
  atoms_.resize(n * order, grid.dim());
  Eigen::Index row = 0;
  for (const GroupElement& e : elements)
    for (Eigen::Index j = 0; j < n; ++j)
      atoms_.row(row++) = apply(group, e, grid.points.row(j)).transpose();
  double self_sum = kernel_offdiag_sum(kernel_, atoms_);
  for (Eigen::Index i = 0; i < atoms_.rows(); ++i)
    self_sum += kernel_(atoms_.row(i), atoms_.row(i));
  const double a = static_cast<double>(atoms_.rows());
  atom_self_mean_ = self_sum / (a * a);
}

double RecenteredMmd::operator()(MatrixRef signed_ranks) const {
  const Eigen::Index n = signed_ranks.rows();
  if (n < 1) throw InvalidInput("recentered_mmd: empty input");
  double pair_sum = kernel_offdiag_sum(kernel_, signed_ranks);
  for (Eigen::Index i = 0; i < n; ++i)
    pair_sum += kernel_(signed_ranks.row(i), signed_ranks.row(i));
  const double nd = static_cast<double>(n);
  const double a = static_cast<double>(atoms_.rows());
  double cross_mean = kernel_cross_sum(kernel_, signed_ranks, atoms_) / (nd * a);
  double mmd2 = pair_sum / (nd * nd) + atom_self_mean_ - 2.0 * cross_mean;
  return nd * mmd2;
}

double recentered_mmd_stat(MatrixRef signed_ranks, const Kernel& kernel, const ReferenceGrid& grid,
                           const SymmetryGroup& group) {
  return RecenteredMmd(grid, group, kernel)(signed_ranks);
}

double hotelling_two_sample(MatrixRef x, MatrixRef y) {
  if (x.cols() != y.cols()) throw InvalidInput("hotelling_two_sample: dimension mismatch");
  const Eigen::Index m = x.rows(), n = y.rows(), p = x.cols();
  if (m + n <= p + 1) throw InvalidInput("hotelling_two_sample: need m + n > p + 1");
  Matrix pooled(m + n, p);
  pooled.topRows(m) = x;
  pooled.bottomRows(n) = y;
  Vector grand = pooled.colwise().mean().transpose();
  Matrix centered = pooled.rowwise() - grand.transpose();
  Matrix cov = centered.transpose() * centered / static_cast<double>(m + n - 1);
  Vector delta = x.colwise().mean().transpose() - y.colwise().mean().transpose();
  const double md = static_cast<double>(m), nd = static_cast<double>(n);
  return md * nd / (md + nd) * delta.dot(spd_solve(cov, delta));
}

double hotelling_one_sample(MatrixRef x) {
  const Eigen::Index n = x.rows(), p = x.cols();
  if (n <= p) throw InvalidInput("hotelling_one_sample: need n > p");
  Vector mean = x.colwise().mean().transpose();
  Matrix centered = x.rowwise() - mean.transpose();
  Matrix cov = centered.transpose() * centered / static_cast<double>(n - 1);
  return static_cast<double>(n) * mean.dot(spd_solve(cov, mean));
}

}  // namespace otr
