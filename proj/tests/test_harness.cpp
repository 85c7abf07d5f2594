#include "otrank/harness.hpp"

#include "otrank/random.hpp"

#include <doctest.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <map>
#include <sstream>

using otr::DataGenerator;
using otr::HarnessOptions;
using otr::Matrix;
using otr::PowerTable;
using otr::Scenario;
using otr::ScenarioTest;
using otr::SymmetryGroup;

namespace {

Scenario small_spherical(double lambda, std::uint64_t seed) {
  Scenario s;
  s.name = "small";
  s.generator = DataGenerator::GaussianShift;
  s.lambda = lambda;
  s.n = 64;
  s.p = 2;
  s.group = SymmetryGroup::spherical(2);
  s.tests = {ScenarioTest::Hotelling, ScenarioTest::OtWilcox, ScenarioTest::OtMmd};
  s.replications = 200;
  s.null_replicates = 199;
  s.seed = seed;
  return s;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("suite parsing: scenarios, comments, and errors") {
  std::istringstream in(
      "# power study\n"
      "name=a\n"
      "generator=gaussian_shift\n"
      "lambda=0.1\n"
      "n=50\n"
      "p=2\n"
      "group=spherical\n"
      "tests=hotelling,ot_mmd\n"
      "replications=10\n"
      "B=19\n"
      "seed=3\n"
      "\n"
      "name=b\n"
      "generator=twosample_gaussian_shift\n"
      "lambda=0.5\n"
      "m=20\n"
      "n=30\n"
      "p=3\n"
      "tests=ranksum,rank_mmd,hotelling2\n"
      "replications=5\n"
      "B=19\n"
      "seed=4\n");
  std::vector<Scenario> suite = otr::parse_suite(in);
  REQUIRE(suite.size() == 2);
  CHECK(suite[0].name == "a");
  CHECK(suite[0].group->kind() == otr::GroupKind::Spherical);
  CHECK(suite[1].m == 20);
  CHECK(suite[1].tests.size() == 3);

  std::istringstream bad_key("name=x\ngenerator=gaussian_shift\nwhat=1\n");
  CHECK_THROWS_AS(otr::parse_suite(bad_key), otr::InvalidInput);
  std::istringstream bad_line("name=x\nnonsense\n");
  CHECK_THROWS_AS(otr::parse_suite(bad_line), otr::InvalidInput);
  std::istringstream mismatch(
      "name=x\ngenerator=gaussian_shift\nn=10\np=2\ngroup=central\ntests=ranksum\n");
  CHECK_THROWS_AS(otr::parse_suite(mismatch), otr::InvalidInput);
  CHECK_THROWS_AS(otr::load_suite("no_such_file.suite"), otr::InvalidInput);
}

TEST_CASE("empty suite gives an empty table") {
  std::istringstream in("# nothing here\n");
  std::vector<Scenario> suite = otr::parse_suite(in);
  CHECK(suite.empty());
  CHECK(otr::run_suite(suite).empty());
}

TEST_CASE("generators produce the advertised shapes") {
  otr::Rng rng(8);
  Scenario s;
  s.n = 500;
  s.p = 2;
  s.generator = DataGenerator::UniformDiskShift;
  s.lambda = 0.0;
  Matrix disk = otr::generate_data(s, rng);
  double max_norm = 0.0;
  for (int i = 0; i < 500; ++i) max_norm = std::max(max_norm, disk.row(i).norm());
  CHECK(max_norm <= 1.0);

  s.generator = DataGenerator::ChiSq1Centered;
  Matrix chi = otr::generate_data(s, rng);
  CHECK(chi.minCoeff() >= -1.0);  // chi^2(1) - 1 >= -1
  CHECK(std::abs(chi.mean()) < 0.15);

  s.generator = DataGenerator::Elliptical;
  Matrix ell = otr::generate_data(s, rng);
  double var0 = ell.col(0).squaredNorm() / 500.0;
  double var1 = ell.col(1).squaredNorm() / 500.0;
  CHECK(var0 / var1 == doctest::Approx(4.0).epsilon(0.35));

  s.generator = DataGenerator::GaussianCorrelated;
  s.rho = 0.6;
  Matrix corr = otr::generate_data(s, rng);
  double c01 = (corr.col(0).dot(corr.col(1))) / 500.0;
  CHECK(c01 == doctest::Approx(0.6).epsilon(0.25));

  s.generator = DataGenerator::ExchH1a;
  Matrix exch = otr::generate_data(s, rng);
  CHECK(exch.col(0).mean() == doctest::Approx(2.0).epsilon(0.1));
  CHECK(std::abs(exch.col(1).mean()) < 0.2);

  s.generator = DataGenerator::TwoSampleGaussianShift;
  s.m = 100;
  s.lambda = 3.0;
  Matrix two = otr::generate_data(s, rng);
  CHECK(two.rows() == 600);
  CHECK(std::abs(two.topRows(100).mean()) < 0.3);
  CHECK(two.bottomRows(500).mean() == doctest::Approx(3.0).epsilon(0.1));
}

TEST_CASE("size control and power at desk scale") {
  PowerTable null_table = otr::run_scenario(small_spherical(0.0, 11));
  REQUIRE(null_table.size() == 3);
  for (const auto& row : null_table) {
    CHECK(row.power >= 0.0);
    CHECK(row.power <= 0.13);  // nominal 0.05 + generous MC slack at 200 reps
    CHECK(row.se == doctest::Approx(std::sqrt(row.power * (1 - row.power) / 200.0)));
  }
  PowerTable shifted = otr::run_scenario(small_spherical(0.5, 11));
  for (const auto& row : shifted) CHECK(row.power > 0.5);
}

TEST_CASE("power is monotone along the shift grid (within MC slack)") {
  std::map<std::string, std::vector<double>> powers;
  for (double lambda : {0.0, 0.25, 0.5}) {
    Scenario s = small_spherical(lambda, 21);
    s.replications = 150;
    for (const auto& row : otr::run_scenario(s)) powers[row.test].push_back(row.power);
  }
  for (const auto& [test, curve] : powers) {
    REQUIRE(curve.size() == 3);
    const double slack = 2.0 * std::sqrt(0.25 / 150.0);
    CHECK(curve[1] >= curve[0] - slack);
    CHECK(curve[2] >= curve[1] - slack);
  }
}

TEST_CASE("two-sample scenario runs all three tests") {
  Scenario s;
  s.name = "two";
  s.generator = DataGenerator::TwoSampleGaussianShift;
  s.lambda = 1.0;
  s.m = 30;
  s.n = 30;
  s.p = 2;
  s.tests = {ScenarioTest::RankSum, ScenarioTest::RankMmd, ScenarioTest::Hotelling2};
  s.replications = 100;
  s.null_replicates = 199;
  s.seed = 31;
  PowerTable table = otr::run_scenario(s);
  REQUIRE(table.size() == 3);
  for (const auto& row : table) CHECK(row.power > 0.7);  // strong shift
}

TEST_CASE("deterministic output, independent of thread count") {
  Scenario s = small_spherical(0.2, 5);
  s.replications = 60;
  HarnessOptions one_thread;
  one_thread.threads = 1;
  HarnessOptions four_threads;
  four_threads.threads = 4;
  std::string csv1 = otr::power_table_csv(otr::run_scenario(s, one_thread));
  std::string csv4 = otr::power_table_csv(otr::run_scenario(s, four_threads));
  CHECK(csv1 == csv4);
  std::string again = otr::power_table_csv(otr::run_scenario(s, four_threads));
  CHECK(csv1 == again);
  CHECK(csv1.rfind("scenario,test,power,se,reps\n", 0) == 0);
}

TEST_CASE("null cache makes reruns cheaper") {
  std::string dir = "test_harness_cache";
  std::filesystem::remove_all(dir);
  Scenario s = small_spherical(0.0, 77);
  s.replications = 30;
  s.null_replicates = 2000;
  HarnessOptions options;
  options.cache_dir = dir;
  auto t0 = std::chrono::steady_clock::now();
  PowerTable first = otr::run_scenario(s, options);
  auto t1 = std::chrono::steady_clock::now();
  PowerTable second = otr::run_scenario(s, options);
  auto t2 = std::chrono::steady_clock::now();
  CHECK(otr::power_table_csv(first) == otr::power_table_csv(second));
  // the second run skips null generation; it must not be slower than the
  // first by more than a small factor (coarse timing check)
  double first_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  double second_ms = std::chrono::duration<double, std::milli>(t2 - t1).count();
  CHECK(second_ms < first_ms * 1.05 + 50.0);
  std::filesystem::remove_all(dir);
}

}  // TEST_SUITE
