#include "otrank/harness.hpp"

#include "otrank/parallel.hpp"
#include "otrank/pipelines.hpp"
#include "otrank/random.hpp"
#include "otrank/special.hpp"
#include "otrank/transport.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace otr {

std::string to_string(DataGenerator gen) {
  switch (gen) {
    case DataGenerator::GaussianShift: return "gaussian_shift";
    case DataGenerator::StudentT1Shift: return "t1_shift";
    case DataGenerator::UniformDiskShift: return "uniform_disk_shift";
    case DataGenerator::Elliptical: return "elliptical";
    case DataGenerator::GaussianCorrelated: return "gaussian_corr";
    case DataGenerator::ChiSq1Centered: return "chisq1_centered";
    case DataGenerator::ExchH0a: return "exch_h0a";
    case DataGenerator::ExchH1a: return "exch_h1a";
    case DataGenerator::ExchH1b: return "exch_h1b";
    case DataGenerator::ExchH1c: return "exch_h1c";
    case DataGenerator::ExchH1d: return "exch_h1d";
    case DataGenerator::TwoSampleGaussianShift: return "twosample_gaussian_shift";
  }
  return "?";
}

DataGenerator parse_data_generator(const std::string& text) {
  static const std::map<std::string, DataGenerator> table = {
      {"gaussian_shift", DataGenerator::GaussianShift},
      {"t1_shift", DataGenerator::StudentT1Shift},
      {"uniform_disk_shift", DataGenerator::UniformDiskShift},
      {"elliptical", DataGenerator::Elliptical},
      {"gaussian_corr", DataGenerator::GaussianCorrelated},
      {"chisq1_centered", DataGenerator::ChiSq1Centered},
      {"exch_h0a", DataGenerator::ExchH0a},
      {"exch_h1a", DataGenerator::ExchH1a},
      {"exch_h1b", DataGenerator::ExchH1b},
      {"exch_h1c", DataGenerator::ExchH1c},
      {"exch_h1d", DataGenerator::ExchH1d},
      {"twosample_gaussian_shift", DataGenerator::TwoSampleGaussianShift},
  };
  auto it = table.find(text);
  if (it == table.end()) throw InvalidInput("scenario: unknown generator '" + text + "'");
  return it->second;
}

std::string to_string(ScenarioTest test) {
  switch (test) {
    case ScenarioTest::Hotelling: return "hotelling";
    case ScenarioTest::OtWilcox: return "ot_wilcox";
    case ScenarioTest::OtMmd: return "ot_mmd";
    case ScenarioTest::Hotelling2: return "hotelling2";
    case ScenarioTest::RankSum: return "ranksum";
    case ScenarioTest::RankMmd: return "rank_mmd";
  }
  return "?";
}

ScenarioTest parse_scenario_test(const std::string& text) {
  static const std::map<std::string, ScenarioTest> table = {
      {"hotelling", ScenarioTest::Hotelling}, {"ot_wilcox", ScenarioTest::OtWilcox},
      {"ot_mmd", ScenarioTest::OtMmd},        {"hotelling2", ScenarioTest::Hotelling2},
      {"ranksum", ScenarioTest::RankSum},     {"rank_mmd", ScenarioTest::RankMmd},
  };
  auto it = table.find(text);
  if (it == table.end()) throw InvalidInput("scenario: unknown test '" + text + "'");
  return it->second;
}

namespace {

bool is_two_sample_test(ScenarioTest test) {
  return test == ScenarioTest::Hotelling2 || test == ScenarioTest::RankSum ||
         test == ScenarioTest::RankMmd;
}

bool is_two_sample_generator(DataGenerator gen) {
  return gen == DataGenerator::TwoSampleGaussianShift;
}

bool is_exchangeability_generator(DataGenerator gen) {
  switch (gen) {
    case DataGenerator::ExchH0a:
    case DataGenerator::ExchH1a:
    case DataGenerator::ExchH1b:
    case DataGenerator::ExchH1c:
    case DataGenerator::ExchH1d:
      return true;
    default:
      return false;
  }
}

}  // namespace

void Scenario::validate() const {
  if (replications < 1) throw InvalidInput("scenario " + name + ": replications must be >= 1");
  if (null_replicates < 1) throw InvalidInput("scenario " + name + ": B must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidInput("scenario " + name + ": alpha must be in (0,1)");
  if (n < 1) throw InvalidInput("scenario " + name + ": n must be >= 1");
  if (tests.empty()) throw InvalidInput("scenario " + name + ": no tests listed");
  const bool two_sample = is_two_sample_generator(generator);
  for (ScenarioTest test : tests)
    if (is_two_sample_test(test) != two_sample)
      throw InvalidInput("scenario " + name + ": test " + otr::to_string(test) +
                         " does not match the generator's sample structure");
  if (two_sample) {
    if (m < 1) throw InvalidInput("scenario " + name + ": two-sample scenario needs m >= 1");
  } else if (!group) {
    throw InvalidInput("scenario " + name + ": one-sample scenario needs a group");
  }
  if (group && group->dim() != p)
    throw InvalidInput("scenario " + name + ": group dimension does not match p");
  if ((generator == DataGenerator::UniformDiskShift || generator == DataGenerator::Elliptical ||
       generator == DataGenerator::GaussianCorrelated || is_exchangeability_generator(generator)) &&
      p != 2)
    throw InvalidInput("scenario " + name + ": generator " + otr::to_string(generator) +
                       " requires p = 2");
}

Matrix generate_data(const Scenario& scenario, Rng& rng) {
  const int n = scenario.n, p = scenario.p;
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  switch (scenario.generator) {
    case DataGenerator::GaussianShift: {
      Matrix x = gaussian_matrix(n, p, rng);
      x.array() += scenario.lambda;
      return x;
    }
    case DataGenerator::StudentT1Shift: {
      Matrix x(n, p);
      for (int i = 0; i < n; ++i) {
        double scale = std::abs(normal(rng));  // chi(1)
        for (int j = 0; j < p; ++j) x(i, j) = normal(rng) / scale + scenario.lambda;
      }
      return x;
    }
    case DataGenerator::UniformDiskShift: {
      Matrix x(n, 2);
      for (int i = 0; i < n; ++i) {
        double r = std::sqrt(unif(rng));
        double theta = 2.0 * M_PI * unif(rng);
        x(i, 0) = r * std::cos(theta) + scenario.lambda;
        x(i, 1) = r * std::sin(theta) + scenario.lambda;
      }
      return x;
    }
    case DataGenerator::Elliptical: {
      Matrix x = gaussian_matrix(n, 2, rng);
      x.col(0) *= 2.0;
      return x;
    }
    case DataGenerator::GaussianCorrelated: {
      const double rho = scenario.rho;
      if (!(rho > -1.0 && rho < 1.0)) throw InvalidInput("scenario: rho must be in (-1,1)");
      Matrix z = gaussian_matrix(n, 2, rng);
      Matrix x(n, 2);
      x.col(0) = z.col(0);
      x.col(1) = rho * z.col(0) + std::sqrt(1.0 - rho * rho) * z.col(1);
      return x;
    }
    case DataGenerator::ChiSq1Centered: {
      Matrix x(n, p);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j) {
          double z = normal(rng);
          x(i, j) = z * z - 1.0;
        }
      return x;
    }
    case DataGenerator::ExchH0a: {
      return gaussian_matrix(n, 2, rng);
    }
    case DataGenerator::ExchH1a: {
      Matrix x = gaussian_matrix(n, 2, rng);
      x.col(0).array() += 2.0;
      return x;
    }
    case DataGenerator::ExchH1b: {
      Matrix x = gaussian_matrix(n, 2, rng);
      x.col(0) = 1.5 * x.col(0);
      x.col(0).array() += 1.0;
      return x;
    }
    case DataGenerator::ExchH1c: {
      Matrix x(n, 2);
      for (int i = 0; i < n; ++i) {
        x(i, 0) = -std::log(1.0 - unif(rng));  // Exp(1)
        x(i, 1) = normal(rng);
      }
      return x;
    }
    case DataGenerator::ExchH1d: {
      Matrix x(n, 2);
      for (int i = 0; i < n; ++i) {
        x(i, 0) = normal(rng);
        x(i, 1) = std::exp(normal(rng));  // LogNormal(0,1)
      }
      return x;
    }
    case DataGenerator::TwoSampleGaussianShift: {
      Matrix x = gaussian_matrix(scenario.m + n, p, rng);
      x.bottomRows(n).array() += scenario.lambda;
      return x;
    }
  }
  throw InvalidInput("scenario: unknown generator");
}

namespace {

struct PreparedNulls {
  std::vector<double> ot_wilcox;
  std::vector<double> ot_mmd;
  std::vector<double> ranksum;
  std::vector<double> rank_mmd;
};

std::vector<double> fetch_null(const NullModel& model, const HarnessOptions& options) {
  if (options.cache_dir && !options.no_cache)
    return NullCache(*options.cache_dir).get(model, options.threads);
  return simulate_null(model, options.threads);
}

}  // namespace

PowerTable run_scenario(const Scenario& scenario, const HarnessOptions& options) {
  scenario.validate();
  const bool two_sample = is_two_sample_generator(scenario.generator);
  const int p = scenario.p;
  const int grid_n = two_sample ? scenario.m + scenario.n : scenario.n;

  GridGenerator reference = scenario.reference
                                ? *scenario.reference
                                : (two_sample ? GridGenerator::Gaussian
                                              : default_reference_for(*scenario.group));
  // One grid per scenario, fixed across all Monte Carlo replications.
  ReferenceGrid grid = make_grid(reference, grid_n, p, derive_seed(scenario.seed, 1));
  if (!two_sample) verify_fundamental_domain(grid, *scenario.group);

  const ScoreFunction score = ScoreFunction::identity();
  const Kernel kernel = Kernel::gaussian(default_gaussian_bandwidth(p));
  const ScoreCovariance sigma = ScoreCovariance::closed_form(Matrix::Identity(p, p));

  // Null samples, one per rank-based test (Hotelling is chi-squared calibrated).
  PreparedNulls nulls;
  for (ScenarioTest test : scenario.tests) {
    NullModel model;
    model.grid = grid;
    model.score = score;
    model.kernel = kernel;
    model.replicates = scenario.null_replicates;
    switch (test) {
      case ScenarioTest::OtWilcox:
        model.test = TestKind::SignedRank;
        model.group = scenario.group;
        model.n = scenario.n;
        model.sigma = sigma;
        model.seed = derive_seed(scenario.seed, 2);
        nulls.ot_wilcox = fetch_null(model, options);
        break;
      case ScenarioTest::OtMmd:
        model.test = TestKind::SymmetryMmd;
        model.group = scenario.group;
        model.n = scenario.n;
        model.seed = derive_seed(scenario.seed, 3);
        nulls.ot_mmd = fetch_null(model, options);
        break;
      case ScenarioTest::RankSum:
        model.test = TestKind::RankSum;
        model.m = scenario.m;
        model.n = scenario.n;
        model.sigma = sigma;
        model.seed = derive_seed(scenario.seed, 4);
        nulls.ranksum = fetch_null(model, options);
        break;
      case ScenarioTest::RankMmd:
        model.test = TestKind::RankMmd;
        model.m = scenario.m;
        model.n = scenario.n;
        model.seed = derive_seed(scenario.seed, 5);
        nulls.rank_mmd = fetch_null(model, options);
        break;
      default:
        break;
    }
  }

  const std::size_t n_tests = scenario.tests.size();
  std::vector<char> rejections(static_cast<std::size_t>(scenario.replications) * n_tests, 0);

  const bool needs_transport =
      std::any_of(scenario.tests.begin(), scenario.tests.end(), [](ScenarioTest t) {
        return t == ScenarioTest::OtWilcox || t == ScenarioTest::OtMmd ||
               t == ScenarioTest::RankSum || t == ScenarioTest::RankMmd;
      });

  parallel_for(scenario.replications, options.threads, [&](std::int64_t r) {
    Rng rng(derive_seed(scenario.seed, 1000 + static_cast<std::uint64_t>(r)));
    Matrix data = generate_data(scenario, rng);

    // The transport is solved once per replication and shared by the tests.
    RankAssignment assignment;
    Matrix x_ranks, y_ranks;
    if (needs_transport) {
      if (two_sample) {
        RankAssignment pooled = rank_map(data, grid);
        x_ranks = pooled.absolute_ranks.topRows(scenario.m);
        y_ranks = pooled.absolute_ranks.bottomRows(scenario.n);
      } else {
        assignment = signed_rank_map(data, grid, *scenario.group, rng);
      }
    }

    for (std::size_t t = 0; t < n_tests; ++t) {
      bool reject = false;
      switch (scenario.tests[t]) {
        case ScenarioTest::Hotelling:
          reject = asymptotic_pvalue_chisq(hotelling_one_sample(data), p) <= scenario.alpha;
          break;
        case ScenarioTest::Hotelling2:
          reject = asymptotic_pvalue_chisq(
                       hotelling_two_sample(data.topRows(scenario.m), data.bottomRows(scenario.n)),
                       p) <= scenario.alpha;
          break;
        case ScenarioTest::OtWilcox: {
          Vector w = signed_rank_stat(assignment, *scenario.group, score);
          reject = reject_paper_rule(signed_rank_quadform(w, sigma), nulls.ot_wilcox, scenario.alpha);
          break;
        }
        case ScenarioTest::OtMmd: {
          double stat = symmetry_mmd_stat(assignment.signed_ranks, kernel.sigma);
          reject = reject_paper_rule(stat, nulls.ot_mmd, scenario.alpha);
          break;
        }
        case ScenarioTest::RankSum: {
          double stat = ranksum_stat(x_ranks, y_ranks, score, sigma);
          reject = reject_paper_rule(stat, nulls.ranksum, scenario.alpha);
          break;
        }
        case ScenarioTest::RankMmd: {
          double stat = rank_mmd_stat(x_ranks, y_ranks, score, kernel);
          reject = reject_paper_rule(stat, nulls.rank_mmd, scenario.alpha);
          break;
        }
      }
      rejections[static_cast<std::size_t>(r) * n_tests + t] = reject ? 1 : 0;
    }
  });

  PowerTable table;
  for (std::size_t t = 0; t < n_tests; ++t) {
    long long count = 0;
    for (int r = 0; r < scenario.replications; ++r)
      count += rejections[static_cast<std::size_t>(r) * n_tests + t];
    PowerRow row;
    row.scenario = scenario.name;
    row.test = otr::to_string(scenario.tests[t]);
    row.replications = scenario.replications;
    row.power = static_cast<double>(count) / scenario.replications;
    row.se = std::sqrt(row.power * (1.0 - row.power) / scenario.replications);
    table.push_back(std::move(row));
  }
  return table;
}

std::vector<Scenario> parse_suite(std::istream& in) {
  std::vector<Scenario> suite;
  std::map<std::string, std::string> block;
  int line_no = 0;

  auto flush = [&]() {
    if (block.empty()) return;
    Scenario s;
    auto take = [&](const char* key) -> std::optional<std::string> {
      auto it = block.find(key);
      if (it == block.end()) return std::nullopt;
      std::string v = it->second;
      block.erase(it);
      return v;
    };
    try {
      if (auto v = take("name")) s.name = *v;
      if (s.name.empty()) throw InvalidInput("scenario block needs a name");
      if (auto v = take("generator")) s.generator = parse_data_generator(*v);
      if (auto v = take("lambda")) s.lambda = std::stod(*v);
      if (auto v = take("rho")) s.rho = std::stod(*v);
      if (auto v = take("n")) s.n = std::stoi(*v);
      if (auto v = take("m")) s.m = std::stoi(*v);
      if (auto v = take("p")) s.p = std::stoi(*v);
      if (auto v = take("group")) s.group = SymmetryGroup::parse(*v, s.p);
      if (auto v = take("reference")) s.reference = parse_grid_generator(*v);
      if (auto v = take("tests")) {
        std::stringstream ss(*v);
        std::string tok;
        while (std::getline(ss, tok, ',')) s.tests.push_back(parse_scenario_test(tok));
      }
      if (auto v = take("replications")) s.replications = std::stoi(*v);
      if (auto v = take("B")) s.null_replicates = std::stoi(*v);
      if (auto v = take("alpha")) s.alpha = std::stod(*v);
      if (auto v = take("seed")) s.seed = std::stoull(*v);
    } catch (const InvalidInput&) {
      throw;
    } catch (const std::exception& e) {
      throw InvalidInput("suite: cannot parse scenario '" + s.name + "': " + e.what());
    }
    if (!block.empty())
      throw InvalidInput("suite: unknown key '" + block.begin()->first + "' in scenario '" +
                         s.name + "'");
    s.validate();
    suite.push_back(std::move(s));
    block.clear();
  };

  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    if (line[0] == '#') continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw InvalidInput("suite: expected key=value at line " + std::to_string(line_no));
    block[line.substr(0, eq)] = line.substr(eq + 1);
  }
  flush();
  return suite;
}

std::vector<Scenario> load_suite(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("suite: cannot open '" + path + "'");
  return parse_suite(in);
}

PowerTable run_suite(const std::vector<Scenario>& suite, const HarnessOptions& options) {
  PowerTable table;
  for (const Scenario& scenario : suite) {
    if (options.progress)
      (*options.progress) << "running scenario " << scenario.name << " (" << scenario.replications
                          << " replications)\n"
                          << std::flush;
    PowerTable rows = run_scenario(scenario, options);
    table.insert(table.end(), rows.begin(), rows.end());
  }
  return table;
}

std::string power_table_csv(const PowerTable& table) {
  std::string out = "scenario,test,power,se,reps\n";
  char buf[64];
  for (const PowerRow& row : table) {
    std::snprintf(buf, sizeof buf, "%.6f,%.6f", row.power, row.se);
    out += row.scenario + "," + row.test + "," + buf + "," + std::to_string(row.replications) + "\n";
  }
  return out;
}

std::string power_table_long(const PowerTable& table) {
  std::string out;
  char buf[64];
  for (const PowerRow& row : table) {
    std::snprintf(buf, sizeof buf, "%.6f %.6f", row.power, row.se);
    out += row.scenario + " " + row.test + " " + buf + " " + std::to_string(row.replications) + "\n";
  }
  return out;
}

}  // namespace otr
