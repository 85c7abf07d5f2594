#pragma once

// Scenario engine for the power studies: named data generators, per-scenario
// Monte Carlo power estimation against cached distribution-free nulls, and
// batch suites with CSV emission.

#include "otrank/calibration.hpp"
#include "otrank/types.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace otr {

enum class DataGenerator {
  GaussianShift,       // N(0, I_p) + lambda 1_p
  StudentT1Shift,      // multivariate t, 1 df, location lambda 1_p, scale I_p
  UniformDiskShift,    // uniform on the unit disk (p = 2) + lambda 1_2
  Elliptical,          // (2 Z_1, Z_2)
  GaussianCorrelated,  // N(0, [[1, rho], [rho, 1]])
  ChiSq1Centered,      // i.i.d. coordinates chi^2(1) - 1
  ExchH0a,             // (N(0,1), N(0,1))
  ExchH1a,             // (N(2,1), N(0,1))
  ExchH1b,             // (N(1,1.5^2), N(0,1))
  ExchH1c,             // (Exp(1), N(0,1))
  ExchH1d,             // (N(0,1), LogNormal(0,1))
  TwoSampleGaussianShift,  // X ~ N(0, I_p), Y ~ N(lambda 1_p, I_p)
};

std::string to_string(DataGenerator gen);
DataGenerator parse_data_generator(const std::string& text);

enum class ScenarioTest { Hotelling, OtWilcox, OtMmd, Hotelling2, RankSum, RankMmd };

std::string to_string(ScenarioTest test);
ScenarioTest parse_scenario_test(const std::string& text);

struct Scenario {
  std::string name;
  DataGenerator generator = DataGenerator::GaussianShift;
  double lambda = 0.0;
  double rho = 0.0;
  int n = 0;
  int m = 0;  // two-sample scenarios
  int p = 2;
  std::optional<SymmetryGroup> group;          // one-sample scenarios
  std::optional<GridGenerator> reference;      // default depends on the group
  std::vector<ScenarioTest> tests;
  int replications = 1000;
  int null_replicates = 1000;
  double alpha = 0.05;
  std::uint64_t seed = 0;

  void validate() const;
};

struct PowerRow {
  std::string scenario;
  std::string test;
  double power = 0.0;
  double se = 0.0;
  int replications = 0;
};

using PowerTable = std::vector<PowerRow>;

struct HarnessOptions {
  int threads = 1;
  std::optional<std::string> cache_dir;
  bool no_cache = false;
  std::ostream* progress = nullptr;
};

/// Draws one dataset from the generator (n rows; two-sample generators append
/// the Y block after the m X rows).
Matrix generate_data(const Scenario& scenario, Rng& rng);

/// Empirical power of every test in the scenario: a fixed reference grid,
/// cached null samples, `replications` fresh datasets, rejection when the
/// observed statistic exceeds (1 - alpha) of the simulated nulls (Hotelling
/// uses the asymptotic chi-squared tail).
PowerTable run_scenario(const Scenario& scenario, const HarnessOptions& options = {});

/// Parses a line-oriented key=value scenario file (blank-line separated
/// blocks, '#' comments).
std::vector<Scenario> parse_suite(std::istream& in);
std::vector<Scenario> load_suite(const std::string& path);

/// Runs every scenario of a suite and concatenates the rows.
PowerTable run_suite(const std::vector<Scenario>& suite, const HarnessOptions& options = {});

/// CSV with header "scenario,test,power,se,reps".
std::string power_table_csv(const PowerTable& table);
/// Space-separated long format (gnuplot-friendly).
std::string power_table_long(const PowerTable& table);

}  // namespace otr
