#include "otrank/statistics.hpp"

#include "oracles.hpp"
#include "otrank/calibration.hpp"
#include "otrank/random.hpp"

#include <doctest.h>

#include <cmath>

using otr::GridGenerator;
using otr::Kernel;
using otr::Matrix;
using otr::ReferenceGrid;
using otr::ScoreCovariance;
using otr::ScoreFunction;
using otr::SymmetryGroup;
using otr::Vector;

namespace {

double naive_kernel(const Kernel& k, const Vector& u, const Vector& v) {
  switch (k.kind) {
    case Kernel::Kind::Gaussian: return std::exp(-k.sigma * (u - v).squaredNorm());
    case Kernel::Kind::Laplace: return std::exp(-k.sigma * (u - v).lpNorm<1>());
    case Kernel::Kind::Distance:
      return 0.5 * (std::pow(u.norm(), k.alpha) + std::pow(v.norm(), k.alpha) -
                    std::pow((u - v).norm(), k.alpha));
  }
  return 0.0;
}

// Naive double-loop evaluation of the rank MMD statistic.
double naive_rank_mmd(const Matrix& xr, const Matrix& yr, const Kernel& k) {
  const Eigen::Index m = xr.rows(), n = yr.rows();
  double w1 = 0.0, w2 = 0.0, b = 0.0;
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j)
      if (i != j) w1 += naive_kernel(k, xr.row(i), xr.row(j));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j) w2 += naive_kernel(k, yr.row(i), yr.row(j));
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < n; ++j) b += naive_kernel(k, xr.row(i), yr.row(j));
  const double md = static_cast<double>(m), nd = static_cast<double>(n);
  return md * nd / (md + nd) *
         (w1 / (md * (md - 1.0)) + w2 / (nd * (nd - 1.0)) - 2.0 * b / (md * nd));
}

// Naive evaluation of n MMD^2 against the uniform law over the atoms Q h_j.
double naive_recentered(const Matrix& u, const Matrix& atoms, const Kernel& k) {
  const Eigen::Index n = u.rows(), a = atoms.rows();
  double t1 = 0.0, t2 = 0.0, t3 = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) t1 += naive_kernel(k, u.row(i), u.row(j));
  for (Eigen::Index i = 0; i < a; ++i)
    for (Eigen::Index j = 0; j < a; ++j) t2 += naive_kernel(k, atoms.row(i), atoms.row(j));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < a; ++j) t3 += naive_kernel(k, u.row(i), atoms.row(j));
  const double nd = static_cast<double>(n), ad = static_cast<double>(a);
  return nd * (t1 / (nd * nd) + t2 / (ad * ad) - 2.0 * t3 / (nd * ad));
}

}  // namespace

TEST_SUITE("statistics") {

TEST_CASE("rank-sum statistic: zero difference and the hand-computed case") {
  Matrix same(3, 2);
  same << 0.1, 0.2, 0.3, 0.4, 0.5, 0.6;
  ScoreCovariance identity_cov = ScoreCovariance::closed_form(Matrix::Identity(2, 2));
  CHECK(otr::ranksum_stat(same, same, ScoreFunction::identity(), identity_cov) ==
        doctest::Approx(0.0).epsilon(1e-14));

  // m = n = 1, p = 1, ranks {0.5}, {1.0}, Sigma = 1/12:
  // (1/2) * (-0.5) * 12 * (-0.5) = 1.5
  Matrix xr(1, 1), yr(1, 1);
  xr << 0.5;
  yr << 1.0;
  ScoreCovariance unif_cov = ScoreCovariance::closed_form(Matrix::Constant(1, 1, 1.0 / 12.0));
  CHECK(otr::ranksum_stat(xr, yr, ScoreFunction::identity(), unif_cov) ==
        doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("rank-sum statistic: null mean is the dimension (chi-squared limit)") {
  // Simulated null at m = n = 50, p = 2: mean over 10^4 null draws is near 2.
  ReferenceGrid grid = otr::make_grid(GridGenerator::Gaussian, 100, 2, 21);
  otr::NullModel model;
  model.test = otr::TestKind::RankSum;
  model.grid = grid;
  model.m = 50;
  model.n = 50;
  model.score = ScoreFunction::identity();
  model.sigma = ScoreCovariance::closed_form(Matrix::Identity(2, 2));
  model.replicates = 10000;
  model.seed = 5;
  std::vector<double> nulls = otr::simulate_null(model);
  CHECK(oracle::mean(nulls) == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("rank MMD: hand-computed two-by-two case") {
  Matrix xr(2, 1), yr(2, 1);
  xr << 0.0, 0.0;
  yr << 1.0, 1.0;
  double gamma = otr::rank_mmd_stat(xr, yr, ScoreFunction::identity(), Kernel::gaussian(1.0));
  CHECK(gamma == doctest::Approx(2.0 - 2.0 * std::exp(-1.0)).epsilon(1e-12));
}

TEST_CASE("rank MMD: identical blocks stay above the diagonal-correction bound") {
  otr::Rng rng(9);
  Matrix pts = otr::gaussian_matrix(6, 2, rng);
  for (const Kernel& k :
       {Kernel::gaussian(0.5), Kernel::laplace(0.7), Kernel::distance(1.0)}) {
    double gamma = otr::rank_mmd_stat(pts, pts, ScoreFunction::identity(), k);
    double bound = otr::rank_mmd_lower_bound(6, 6, k, pts, pts, ScoreFunction::identity());
    CHECK(gamma >= bound - 1e-12);
    CHECK(gamma <= 1e-12);  // equal point sets: only the diagonal correction remains
  }
}

TEST_CASE("rank MMD matches the naive double-loop oracle") {
  otr::Rng rng(33);
  for (const Kernel& k :
       {Kernel::gaussian(0.3), Kernel::laplace(1.1), Kernel::distance(1.5)}) {
    Matrix xr = otr::gaussian_matrix(7, 3, rng);
    Matrix yr = otr::gaussian_matrix(5, 3, rng);
    double fast = otr::rank_mmd_stat(xr, yr, ScoreFunction::identity(), k);
    CHECK(fast == doctest::Approx(naive_rank_mmd(xr, yr, k)).epsilon(1e-12));
  }
}

TEST_CASE("signed-rank statistic: single observation") {
  otr::RankAssignment single;
  single.signed_ranks.resize(1, 2);
  single.signed_ranks << 0.3, -0.4;
  single.absolute_ranks = single.signed_ranks;
  single.signs.push_back(otr::GroupElement{});
  Vector w = otr::signed_rank_stat(single, SymmetryGroup::trivial(2), ScoreFunction::identity());
  CHECK(w[0] == doctest::Approx(0.3));
  CHECK(w[1] == doctest::Approx(-0.4));
}

TEST_CASE("signed-rank statistic: orbit-paired data cancels on a constructed instance") {
  // Data {x, -x, y, -y} under the central group. Within each pair the two
  // assignments tie (the quotient cost is even in x), so the grid is built
  // with h1 - h2 = -(h3 - h4): whichever way the solver resolves the ties,
  // the pair contributions are +-(h1 - h2) and +-(h3 - h4), and the solver
  // resolves both pairs the same way, so W vanishes.
  ReferenceGrid grid;
  grid.points.resize(4, 2);
  grid.points << 2.0, 1.0, 1.0, 1.0, 3.0, 3.0, 4.0, 3.0;
  Matrix data(4, 2);
  data << 1.7, 1.0, -1.7, -1.0, 3.4, 3.0, -3.4, -3.0;
  otr::Rng rng(3);
  SymmetryGroup central = SymmetryGroup::central(2);
  otr::RankAssignment paired = otr::signed_rank_map(data, grid, central, rng);

  // direct computation: W must equal the sum of the per-observation closest
  // orbit points regardless of the tie resolution
  Vector direct = Vector::Zero(2);
  for (int i = 0; i < 4; ++i)
    direct += otr::closest_orbit_point(central, data.row(i), paired.absolute_ranks.row(i));
  direct /= 2.0;  // sqrt(n) = 2
  Vector w = otr::signed_rank_stat(paired, central, ScoreFunction::identity());
  CHECK((w - direct).norm() < 1e-12);
  CHECK(w.norm() < 1e-12);
}

TEST_CASE("signed-rank statistic equals the classical Wilcoxon statistic in 1-D") {
  // W_n = (2 W+ - n(n+1)/2) / n^{3/2} where W+ is the classical signed-rank sum.
  otr::Rng rng(21);
  std::normal_distribution<double> normal(0.3, 1.0);
  SymmetryGroup central = SymmetryGroup::central(1);
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 10;
    Matrix sample(n, 1);
    std::vector<double> x(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      x[static_cast<std::size_t>(i)] = normal(rng);
      sample(i, 0) = x[static_cast<std::size_t>(i)];
    }
    Matrix gp(n, 1);
    for (int j = 0; j < n; ++j) gp(j, 0) = (j + 1.0) / n;
    ReferenceGrid grid;
    grid.points = gp;
    otr::RankAssignment assignment = otr::signed_rank_map(sample, grid, central, rng);
    Vector w = otr::signed_rank_stat(assignment, central, ScoreFunction::identity());

    oracle::Classical1d classical = oracle::classical_signed_ranks(x);
    double wplus = 0.0;
    for (int i = 0; i < n; ++i)
      if (classical.sign[static_cast<std::size_t>(i)] > 0)
        wplus += classical.abs_rank[static_cast<std::size_t>(i)];
    double expected = (2.0 * wplus - n * (n + 1) / 2.0) / std::pow(n, 1.5);
    CHECK(w[0] == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("non-identity scores are rejected for non-componentwise groups") {
  otr::Rng rng(5);
  Matrix sample = otr::gaussian_matrix(8, 2, rng);
  ReferenceGrid grid = otr::make_grid(GridGenerator::ChiNormAxis, 8, 2, 12);
  otr::RankAssignment a = otr::signed_rank_map(sample, grid, SymmetryGroup::spherical(2), rng);
  CHECK_THROWS_AS(otr::signed_rank_stat(a, SymmetryGroup::spherical(2), ScoreFunction::normal_cdf()),
                  otr::InvalidInput);
  // componentwise group: fine
  ReferenceGrid grid2 = otr::make_grid(GridGenerator::Gaussian, 8, 2, 12);
  otr::RankAssignment b = otr::signed_rank_map(sample, grid2, SymmetryGroup::sign(2), rng);
  CHECK_NOTHROW(otr::signed_rank_stat(b, SymmetryGroup::sign(2), ScoreFunction::normal_cdf()));
}

TEST_CASE("symmetry MMD: closed-form spec values") {
  // sigma = 0.25, p = 2, single U-hat = 0: T_1 = 1 + 1/2 - 4/3 = 1/6.
  Matrix u = Matrix::Zero(1, 2);
  CHECK(otr::symmetry_mmd_stat(u, 0.25) == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
  CHECK(otr::gaussian_pair_expectation(0.25, 2) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("symmetry MMD: closed forms match Monte Carlo expectations") {
  otr::Rng rng(71);
  const long long m = 200000;
  for (int p : {1, 2, 5}) {
    Matrix u_row = otr::gaussian_matrix(1, p, rng);
    Matrix draws = otr::gaussian_matrix(m, p, rng);
    for (double sigma : {0.1, otr::default_gaussian_bandwidth(p), 1.0}) {
      double acc = 0.0, acc_sq = 0.0;
      for (long long k = 0; k < m; ++k) {
        double val = std::exp(-sigma * (u_row.row(0) - draws.row(k)).squaredNorm());
        acc += val;
        acc_sq += val * val;
      }
      double mc = acc / m;
      double se = std::sqrt((acc_sq / m - mc * mc) / m);
      CHECK(std::abs(otr::gaussian_mean_embedding(u_row.row(0).transpose(), sigma) - mc) <=
            3.0 * se + 1e-12);
    }
  }
}

TEST_CASE("symmetry MMD is numerically nonnegative and shrinks on true nu_S draws") {
  otr::Rng rng(81);
  std::vector<double> small_n, large_n;
  for (int rep = 0; rep < 100; ++rep) {
    Matrix u100 = otr::gaussian_matrix(100, 2, rng);
    Matrix u800 = otr::gaussian_matrix(800, 2, rng);
    small_n.push_back(otr::symmetry_mmd_stat(u100, 0.125));
    large_n.push_back(otr::symmetry_mmd_stat(u800, 0.125));
    CHECK(small_n.back() >= -2e-12);
    CHECK(large_n.back() >= -2e-12);
  }
  CHECK(oracle::median(large_n) < oracle::median(small_n));
}

TEST_CASE("symmetry MMD Monte Carlo fallback agrees with the closed form") {
  otr::Rng rng(91);
  Matrix u = otr::gaussian_matrix(20, 2, rng);
  double exact = otr::symmetry_mmd_stat(u, 0.125);
  auto nu_s = otr::SymmetrizedReference::from_generator(GridGenerator::Gaussian, 2,
                                                        SymmetryGroup::trivial(2));
  double mc = otr::symmetry_mmd_stat_mc(u, Kernel::gaussian(0.125), nu_s, 200000, rng);
  CHECK(mc == doctest::Approx(exact).epsilon(0.02));
}

TEST_CASE("recentered MMD: two-atom hand case, exact-support zero, and the naive oracle") {
  Kernel k = Kernel::gaussian(0.125);
  SymmetryGroup central = SymmetryGroup::central(2);
  ReferenceGrid grid;
  grid.points.resize(1, 2);
  grid.points << 1.0, -0.5;
  otr::RecenteredMmd evaluator(grid, central, k);

  Matrix u(1, 2);
  u << 1.0, -0.5;
  Vector h = grid.points.row(0).transpose();
  double khh = 1.0;
  double khm = std::exp(-k.sigma * (2.0 * h).squaredNorm());
  CHECK(evaluator(u) == doctest::Approx(0.5 * (khh - khm)).epsilon(1e-12));
  CHECK(evaluator(u) >= 0.0);

  // empirical measure equal to the full symmetrized atom set: MMD = 0
  ReferenceGrid grid2 = otr::make_grid(GridGenerator::Gaussian, 5, 2, 3);
  otr::RecenteredMmd evaluator2(grid2, central, k);
  Matrix atoms = evaluator2.atoms();
  CHECK(std::abs(evaluator2(atoms)) < 1e-9);

  // random instance vs the naive triple-sum oracle
  otr::Rng rng(12);
  Matrix pts = otr::gaussian_matrix(6, 2, rng);
  double fast = evaluator2(pts);
  CHECK(fast == doctest::Approx(naive_recentered(pts, atoms, k)).epsilon(1e-10));
}

TEST_CASE("recentered MMD rejects infinite groups") {
  ReferenceGrid grid = otr::make_grid(GridGenerator::ChiNormAxis, 4, 2, 3);
  CHECK_THROWS_AS(otr::RecenteredMmd(grid, SymmetryGroup::spherical(2), Kernel::gaussian(0.125)),
                  otr::InvalidInput);
}

TEST_CASE("Hotelling statistics: zeros, affine invariance, and a hand-computed instance") {
  otr::Rng rng(61);
  Matrix x = otr::gaussian_matrix(30, 3, rng);
  Matrix centered = x.rowwise() - x.colwise().mean();
  CHECK(otr::hotelling_one_sample(centered) < 1e-18);

  Matrix y = otr::gaussian_matrix(25, 3, rng);
  double base = otr::hotelling_two_sample(x, y);
  Matrix a(3, 3);
  a << 2, 0.3, 0, -0.5, 1.1, 0.2, 0, 0.7, 0.9;
  Vector b(3);
  b << 1, -2, 3;
  Matrix xt = (x * a.transpose()).rowwise() + b.transpose();
  Matrix yt = (y * a.transpose()).rowwise() + b.transpose();
  CHECK(otr::hotelling_two_sample(xt, yt) == doctest::Approx(base).epsilon(1e-8));

  double one_base = otr::hotelling_one_sample(x);
  CHECK(otr::hotelling_one_sample(x * a.transpose()) == doctest::Approx(one_base).epsilon(1e-8));

  // fixed four-observation dataset, p = 1: T2 = n xbar^2 / s^2
  Matrix tiny(4, 1);
  tiny << 1.0, 2.0, 3.0, 6.0;
  double mean = 3.0;
  double var = ((1 - mean) * (1 - mean) + (2 - mean) * (2 - mean) + (3 - mean) * (3 - mean) +
                (6 - mean) * (6 - mean)) / 3.0;
  CHECK(otr::hotelling_one_sample(tiny) == doctest::Approx(4.0 * mean * mean / var).epsilon(1e-12));

  CHECK_THROWS_AS(otr::hotelling_one_sample(Matrix::Zero(2, 3)), otr::InvalidInput);
}

TEST_CASE("Hotelling rejects singular covariance") {
  Matrix degenerate(5, 2);
  degenerate << 1, 2, 2, 4, 3, 6, 4, 8, 5, 10;  // rank one
  CHECK_THROWS_AS(otr::hotelling_one_sample(degenerate), otr::NumericalError);
}

TEST_CASE("ERD covariance closed forms and the Monte Carlo mode") {
  ScoreCovariance id = otr::erd_covariance_closed_form(GridGenerator::Gaussian,
                                                       ScoreFunction::identity(), 2);
  CHECK(id.matrix == Matrix::Identity(2, 2));
  ScoreCovariance phi = otr::erd_covariance_closed_form(GridGenerator::Gaussian,
                                                        ScoreFunction::normal_cdf(), 2);
  CHECK(phi.matrix(0, 0) == doctest::Approx(1.0 / 12.0).epsilon(1e-14));
  CHECK(phi.matrix(0, 1) == 0.0);
  ScoreCovariance erd1 = otr::erd_covariance_closed_form(
      GridGenerator::ChiNormAxis, ScoreFunction::identity(), 3, SymmetryGroup::spherical(3));
  CHECK(erd1.matrix == Matrix::Identity(3, 3));
  CHECK_THROWS_AS(otr::erd_covariance_closed_form(GridGenerator::SphericalUniform,
                                                  ScoreFunction::identity(), 2),
                  otr::InvalidInput);

  // Monte Carlo estimate agrees with the probability-integral-transform oracle:
  // Phi(Z) ~ Unif(0,1) has variance 1/12.
  otr::Rng rng(41);
  auto ref = otr::SymmetrizedReference::from_generator(GridGenerator::Gaussian, 2,
                                                       SymmetryGroup::trivial(2));
  ScoreCovariance mc = otr::erd_covariance_monte_carlo(ref, ScoreFunction::normal_cdf(), 100000, rng);
  CHECK(mc.matrix(0, 0) == doctest::Approx(1.0 / 12.0).epsilon(0.03));
  CHECK(mc.matrix(1, 1) == doctest::Approx(1.0 / 12.0).epsilon(0.03));
  CHECK(std::abs(mc.matrix(0, 1)) < 0.003);

  // ERD1 for the spherical group with a chi-norm-axis base is I (nu_S = N(0,I)).
  auto sph = otr::SymmetrizedReference::from_generator(GridGenerator::ChiNormAxis, 2,
                                                       SymmetryGroup::spherical(2));
  ScoreCovariance mc_sph = otr::erd_covariance_monte_carlo(sph, ScoreFunction::identity(), 100000, rng);
  CHECK(mc_sph.matrix(0, 0) == doctest::Approx(1.0).epsilon(0.03));
  CHECK(mc_sph.matrix(1, 1) == doctest::Approx(1.0).epsilon(0.03));
  CHECK(std::abs(mc_sph.matrix(0, 1)) < 0.03);
}

TEST_CASE("quadratic forms reject ill-conditioned covariance") {
  Matrix near_singular(2, 2);
  near_singular << 1.0, 1.0, 1.0, 1.0 + 1e-14;
  ScoreCovariance bad = ScoreCovariance::closed_form(near_singular);
  Vector w(2);
  w << 1.0, 2.0;
  CHECK_THROWS_AS(otr::signed_rank_quadform(w, bad), otr::NumericalError);
}

TEST_CASE("statistics are invariant to simultaneous relabeling of the rank rows") {
  otr::Rng rng(3);
  Matrix xr = otr::gaussian_matrix(8, 2, rng);
  Matrix yr = otr::gaussian_matrix(6, 2, rng);
  ScoreCovariance cov = ScoreCovariance::closed_form(Matrix::Identity(2, 2));
  Kernel k = Kernel::gaussian(0.125);
  double rs = otr::ranksum_stat(xr, yr, ScoreFunction::identity(), cov);
  double gm = otr::rank_mmd_stat(xr, yr, ScoreFunction::identity(), k);
  std::vector<int> perm = otr::random_permutation(8, rng);
  Matrix xp(8, 2);
  for (int i = 0; i < 8; ++i) xp.row(i) = xr.row(perm[static_cast<std::size_t>(i)]);
  CHECK(otr::ranksum_stat(xp, yr, ScoreFunction::identity(), cov) == doctest::Approx(rs).epsilon(1e-12));
  CHECK(otr::rank_mmd_stat(xp, yr, ScoreFunction::identity(), k) == doctest::Approx(gm).epsilon(1e-12));
}

}  // TEST_SUITE
