#include "otrank/calibration.hpp"

#include "oracles.hpp"
#include "otrank/random.hpp"
#include "otrank/special.hpp"
#include "otrank/transport.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

using otr::GridGenerator;
using otr::Matrix;
using otr::NullModel;
using otr::ReferenceGrid;
using otr::ScoreCovariance;
using otr::ScoreFunction;
using otr::SymmetryGroup;
using otr::TestKind;

namespace {

NullModel symmetry_model(int n, int p, std::uint64_t seed, int replicates) {
  NullModel model;
  model.test = TestKind::SymmetryMmd;
  model.grid = otr::make_grid(GridGenerator::Gaussian, n, p, seed + 1);
  model.group = SymmetryGroup::central(p);
  model.n = n;
  model.kernel = otr::Kernel::gaussian(otr::default_gaussian_bandwidth(p));
  model.replicates = replicates;
  model.seed = seed;
  return model;
}

}  // namespace

TEST_SUITE("calibration") {

TEST_CASE("single replicate and determinism") {
  NullModel model = symmetry_model(8, 2, 3, 1);
  CHECK(otr::simulate_null(model).size() == 1);
  model.replicates = 64;
  std::vector<double> a = otr::simulate_null(model);
  std::vector<double> b = otr::simulate_null(model);
  CHECK(a == b);
  // thread count cannot change the result
  std::vector<double> c = otr::simulate_null(model, 4);
  CHECK(a == c);
  model.seed += 1;
  std::vector<double> d = otr::simulate_null(model);
  CHECK(a != d);
}

TEST_CASE("symmetry null matches the exhaustive configuration enumeration") {
  // Central group, n = 4, p = 1: the null law charges all 4! * 2^4 = 384
  // (permutation, sign) configurations equally. Compare the simulated sample
  // against the exact distribution with a KS-type distance.
  const int n = 4;
  ReferenceGrid grid;
  grid.points.resize(n, 1);
  grid.points << 0.4, 0.9, 1.3, 2.2;
  const double sigma = 0.25;

  std::vector<double> exact;
  std::vector<int> perm = {0, 1, 2, 3};
  do {
    for (int mask = 0; mask < 16; ++mask) {
      Matrix u(n, 1);
      for (int i = 0; i < n; ++i)
        u(i, 0) = ((mask >> i) & 1 ? -1.0 : 1.0) * grid.points(perm[static_cast<std::size_t>(i)], 0);
      exact.push_back(otr::symmetry_mmd_stat(u, sigma));
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  CHECK(exact.size() == 384);
  std::sort(exact.begin(), exact.end());

  NullModel model;
  model.test = TestKind::SymmetryMmd;
  model.grid = grid;
  model.group = SymmetryGroup::central(1);
  model.n = n;
  model.kernel = otr::Kernel::gaussian(sigma);
  model.replicates = 10000;
  model.seed = 17;
  std::vector<double> simulated = otr::simulate_null(model);
  std::sort(simulated.begin(), simulated.end());

  // max |F_exact - F_sim| over the simulated points
  double max_gap = 0.0;
  for (std::size_t k = 0; k < simulated.size(); ++k) {
    double f_sim = static_cast<double>(k + 1) / static_cast<double>(simulated.size());
    auto upper = std::upper_bound(exact.begin(), exact.end(), simulated[k]);
    double f_exact = static_cast<double>(upper - exact.begin()) / static_cast<double>(exact.size());
    max_gap = std::max(max_gap, std::abs(f_sim - f_exact));
  }
  CHECK(max_gap < 0.05);
}

TEST_CASE("p-value conventions") {
  std::vector<double> nulls(999);
  for (int i = 0; i < 999; ++i) nulls[static_cast<std::size_t>(i)] = i;
  CHECK(otr::p_value(2000.0, nulls) == doctest::Approx(1.0 / 1000.0));
  CHECK(otr::p_value(-1.0, nulls) == doctest::Approx(1.0));
  // ties count toward the numerator
  std::vector<double> tied = {1.0, 2.0, 2.0, 3.0};
  CHECK(otr::p_value(2.0, tied) == doctest::Approx(4.0 / 5.0));
  CHECK_THROWS_AS(otr::p_value(0.0, std::vector<double>{}), otr::InvalidInput);

  // p-values live on the lattice k/(B+1)
  NullModel model = symmetry_model(6, 2, 5, 99);
  std::vector<double> sample = otr::simulate_null(model);
  double p = otr::p_value(sample[10], sample);
  double scaled = p * 100.0;
  CHECK(scaled == doctest::Approx(std::round(scaled)).epsilon(1e-12));
  CHECK(p > 0.0);
  CHECK(p <= 1.0);
}

TEST_CASE("paper rejection rule") {
  std::vector<double> nulls(1000);
  for (int i = 0; i < 1000; ++i) nulls[static_cast<std::size_t>(i)] = i;  // 0..999
  // observed must exceed 950 of the 1000 values
  CHECK_FALSE(otr::reject_paper_rule(949.5, nulls, 0.05));
  CHECK(otr::reject_paper_rule(950.5, nulls, 0.05));
  CHECK_FALSE(otr::reject_paper_rule(950.0, nulls, 0.05));  // ties below do not count
}

TEST_CASE("asymptotic chi-squared p-values") {
  CHECK(otr::asymptotic_pvalue_chisq(0.0, 3) == 1.0);
  CHECK(otr::asymptotic_pvalue_chisq(5.991, 2) == doctest::Approx(0.05).epsilon(1e-3));
  CHECK(otr::asymptotic_pvalue_chisq(3.841, 1) == doctest::Approx(0.05).epsilon(1e-3));
  CHECK_THROWS_AS(otr::asymptotic_pvalue_chisq(-0.1, 2), otr::InvalidInput);
}

TEST_CASE("finite-sample validity of the Monte Carlo test") {
  // Central-symmetric data through the full pipeline: P(p <= 0.05) stays at
  // or below the nominal level up to Monte Carlo error.
  const int n = 32;
  ReferenceGrid grid = otr::make_grid(GridGenerator::Gaussian, n, 2, 71);
  SymmetryGroup group = SymmetryGroup::central(2);
  NullModel model;
  model.test = TestKind::SymmetryMmd;
  model.grid = grid;
  model.group = group;
  model.n = n;
  model.kernel = otr::Kernel::gaussian(0.125);
  model.replicates = 999;
  model.seed = 5;
  std::vector<double> nulls = otr::simulate_null(model, 2);

  otr::Rng rng(1234);
  const int reps = 2000;
  int rejections = 0;
  for (int r = 0; r < reps; ++r) {
    Matrix data = otr::gaussian_matrix(n, 2, rng);
    otr::RankAssignment a = otr::signed_rank_map(data, grid, group, rng);
    double stat = otr::symmetry_mmd_stat(a.signed_ranks, 0.125);
    if (otr::p_value(stat, nulls) <= 0.05) ++rejections;
  }
  double rate = static_cast<double>(rejections) / reps;
  CHECK(rate <= 0.05 + 0.013);  // 0.05 + ~2.7 binomial sigma
}

TEST_CASE("distribution-freeness: different null laws give the same null sample law") {
  // Spherically symmetric Gaussian vs spherically symmetric Cauchy data:
  // the statistic samples must be indistinguishable (small-scale version of
  // the acceptance run).
  const int n = 50;
  ReferenceGrid grid = otr::make_grid(GridGenerator::ChiNormAxis, n, 2, 13);
  SymmetryGroup sph = SymmetryGroup::spherical(2);
  otr::Rng rng(777);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto draw_stats = [&](bool cauchy) {
    std::vector<double> stats;
    for (int r = 0; r < 600; ++r) {
      Matrix data(n, 2);
      for (int i = 0; i < n; ++i) {
        double scale = cauchy ? std::abs(normal(rng)) : 1.0;
        data(i, 0) = normal(rng) / scale;
        data(i, 1) = normal(rng) / scale;
      }
      otr::RankAssignment a = otr::signed_rank_map(data, grid, sph, rng);
      stats.push_back(otr::symmetry_mmd_stat(a.signed_ranks, 0.125));
    }
    return stats;
  };
  std::vector<double> gauss = draw_stats(false);
  std::vector<double> cauchy = draw_stats(true);
  otr::KsResult ks = otr::ks_two_sample(gauss, cauchy);
  CHECK(ks.p_value > 0.01);
}

TEST_CASE("null cache: round trip, reuse, and bypass") {
  std::string dir = "test_null_cache";
  std::filesystem::remove_all(dir);
  otr::NullCache cache(dir);
  NullModel model = symmetry_model(10, 2, 9, 256);

  CHECK_FALSE(cache.load(model).has_value());
  std::vector<double> first = cache.get(model);
  CHECK(first.size() == 256);
  auto reloaded = cache.load(model);
  REQUIRE(reloaded.has_value());
  CHECK(*reloaded == first);  // 17 significant digits round-trip exactly

  // a different seed maps to a different cache entry
  NullModel other = model;
  other.seed = 10;
  CHECK_FALSE(cache.load(other).has_value());

  // bypass neither reads nor writes
  std::filesystem::remove_all(dir);
  std::vector<double> direct = cache.get(model, 1, /*bypass=*/true);
  CHECK(direct == first);
  CHECK_FALSE(std::filesystem::exists(dir));

  // corrupt cache entries are regenerated
  std::vector<double> again = cache.get(model);
  CHECK(again == first);
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    std::ofstream out(entry.path());
    out << "garbage\n";
  }
  CHECK(cache.get(model) == first);
  std::filesystem::remove_all(dir);
}

TEST_CASE("null model validation") {
  NullModel model = symmetry_model(8, 2, 3, 16);
  model.group.reset();
  CHECK_THROWS_AS(otr::simulate_null(model), otr::InvalidInput);
  NullModel bad_size = symmetry_model(8, 2, 3, 16);
  bad_size.n = 7;
  CHECK_THROWS_AS(otr::simulate_null(bad_size), otr::InvalidInput);
  NullModel ranksum;
  ranksum.test = TestKind::RankSum;
  ranksum.grid = otr::make_grid(GridGenerator::Gaussian, 10, 2, 3);
  ranksum.m = 4;
  ranksum.n = 6;
  ranksum.replicates = 4;
  ranksum.seed = 1;
  CHECK_THROWS_AS(otr::simulate_null(ranksum), otr::InvalidInput);  // missing sigma
  ranksum.sigma = ScoreCovariance::closed_form(Matrix::Identity(2, 2));
  CHECK_NOTHROW(otr::simulate_null(ranksum));
}

}  // TEST_SUITE
