// otrank command line: distribution-free multivariate rank tests.
//
// Subcommands: ranksum | rank-mmd | signedrank | symmetry-mmd | hotelling |
//              power | returns | make-grid
// Exit codes: 0 success, 2 usage/input error, 3 numerical failure.

#include "otrank/harness.hpp"
#include "otrank/ingestion.hpp"
#include "otrank/pipelines.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <random>

namespace {

struct CommonFlags {
  std::string group = "central";
  std::string reference;
  std::string score = "identity";
  std::string kernel = "gaussian";
  double sigma = 0.0;  // 0: default 1/(4p)
  double alpha_exponent = 1.0;
  int replicates = 999;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string calibration = "mc";
  int threads = 0;  // 0: hardware concurrency
  std::string cache_dir = ".otrank-cache";
  bool no_cache = false;
  double jitter = 0.0;
  std::string out;
  std::string format = "json";
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags, bool with_group) {
  if (with_group)
    cmd->add_option("--group", flags.group,
                    "symmetry group: trivial|central|sign|permutation|reflection:<u>|zonal|spherical");
  cmd->add_option("--reference", flags.reference,
                  "reference grid generator, or file:<grid.csv> for a custom grid "
                  "(default depends on the test/group)");
  cmd->add_option("--score", flags.score, "score function: identity|normal_cdf");
  cmd->add_option("--kernel", flags.kernel, "kernel: gaussian|laplace|distance");
  cmd->add_option("--sigma", flags.sigma, "kernel bandwidth (default 1/(4p))");
  cmd->add_option("--alpha-exponent", flags.alpha_exponent, "distance kernel exponent in (0,2)");
  cmd->add_option("--B", flags.replicates, "Monte Carlo null replicates");
  cmd->add_option("--seed", flags.seed, "master seed (default: drawn from system entropy)")
      ->each([&flags](const std::string&) { flags.seed_given = true; });
  cmd->add_option("--calibration", flags.calibration, "calibration: mc|asymptotic");
  cmd->add_option("--threads", flags.threads, "worker threads (default: all cores)");
  cmd->add_option("--cache-dir", flags.cache_dir, "null-sample cache directory");
  cmd->add_flag("--no-cache", flags.no_cache, "bypass the null-sample cache");
  cmd->add_option("--jitter", flags.jitter,
                  "break ties by adding uniform(-eps,eps) noise; valid only under the continuity "
                  "assumption");
  cmd->add_option("--out", flags.out, "output path (default: stdout)");
  cmd->add_option("--format", flags.format, "report format: json|csv");
}

otr::PipelineOptions make_options(const CommonFlags& flags, int p, bool symmetry_test,
                                  const std::optional<otr::SymmetryGroup>& group) {
  otr::PipelineOptions options;
  if (flags.reference.rfind("file:", 0) == 0) {
    options.custom_grid = otr::import_grid_csv(flags.reference.substr(5));
    options.reference = otr::GridGenerator::Custom;
  } else if (!flags.reference.empty()) {
    options.reference = otr::parse_grid_generator(flags.reference);
  } else if (symmetry_test && group) {
    options.reference = otr::default_reference_for(*group);
  } else {
    options.reference = otr::GridGenerator::Gaussian;
  }
  options.score = otr::ScoreFunction::parse(flags.score);
  double bandwidth = flags.sigma > 0.0 ? flags.sigma : otr::default_gaussian_bandwidth(p);
  options.kernel = flags.kernel == "distance" ? otr::Kernel::distance(flags.alpha_exponent)
                                              : otr::Kernel::parse(flags.kernel, bandwidth);
  options.replicates = flags.replicates;
  options.seed = flags.seed;
  if (flags.calibration == "mc") {
    options.calibration = otr::CalibrationMode::MonteCarlo;
  } else if (flags.calibration == "asymptotic") {
    options.calibration = otr::CalibrationMode::AsymptoticChisq;
  } else {
    throw otr::InvalidInput("calibration must be 'mc' or 'asymptotic'");
  }
  options.threads = flags.threads;
  options.cache_dir = flags.cache_dir;
  options.no_cache = flags.no_cache;
  options.jitter = flags.jitter;
  return options;
}

std::uint64_t resolve_seed(CommonFlags& flags) {
  if (!flags.seed_given) {
    std::random_device entropy;
    flags.seed = (static_cast<std::uint64_t>(entropy()) << 32) ^ entropy();
    std::cerr << "otrank: no --seed given; using seed " << flags.seed << "\n";
  }
  return flags.seed;
}

void emit(const otr::TestReport& report, const CommonFlags& flags) {
  std::string text = flags.format == "csv" ? report.to_csv() : report.to_json();
  if (flags.format != "csv" && flags.format != "json")
    throw otr::InvalidInput("format must be 'json' or 'csv'");
  if (flags.out.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(flags.out);
    if (!out) throw otr::InvalidInput("cannot open output file '" + flags.out + "'");
    out << text;
  }
}

void echo_threads(otr::TestReport& report, const CommonFlags& flags) {
  report.config["threads"] = std::to_string(flags.threads);
  report.config["Bflag"] = std::to_string(flags.replicates);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"distribution-free multivariate rank, signed-rank and MMD tests via optimal transport"};
  app.require_subcommand(1);

  CommonFlags flags;

  std::string x_path, y_path;
  auto* ranksum = app.add_subcommand("ranksum", "generalized Wilcoxon rank-sum test (two samples)");
  ranksum->add_option("x", x_path, "first sample CSV")->required();
  ranksum->add_option("y", y_path, "second sample CSV")->required();
  add_common_flags(ranksum, flags, false);

  auto* rank_mmd = app.add_subcommand("rank-mmd", "rank kernel MMD two-sample test");
  rank_mmd->add_option("x", x_path, "first sample CSV")->required();
  rank_mmd->add_option("y", y_path, "second sample CSV")->required();
  add_common_flags(rank_mmd, flags, false);

  auto* signedrank = app.add_subcommand("signedrank", "generalized Wilcoxon signed-rank test");
  signedrank->add_option("x", x_path, "sample CSV")->required();
  add_common_flags(signedrank, flags, true);

  auto* symmetry = app.add_subcommand("symmetry-mmd", "OT-MMD test for G-symmetry");
  symmetry->add_option("x", x_path, "sample CSV")->required();
  add_common_flags(symmetry, flags, true);

  auto* hotelling = app.add_subcommand("hotelling", "Hotelling T^2 test (one or two samples)");
  hotelling->add_option("x", x_path, "first sample CSV")->required();
  hotelling->add_option("y", y_path, "optional second sample CSV");
  add_common_flags(hotelling, flags, false);

  std::string suite_path;
  bool dry_run = false;
  bool long_format = false;
  auto* power = app.add_subcommand("power", "run a power-study suite");
  power->add_option("suite", suite_path, "scenario suite file")->required();
  power->add_flag("--dry-run", dry_run, "list scenarios without computing");
  power->add_flag("--long", long_format, "space-separated long output");
  add_common_flags(power, flags, false);

  std::vector<std::string> price_paths;
  auto* returns = app.add_subcommand("returns", "exchangeability test on monthly asset returns");
  returns->add_option("prices", price_paths, "per-asset price CSVs (date,adj_close)")->required();
  add_common_flags(returns, flags, false);

  int grid_n = 0, grid_p = 0, grid_nr = 0, grid_ns = 0, grid_n0 = 0;
  auto* make_grid_cmd = app.add_subcommand("make-grid", "generate a reference grid CSV");
  make_grid_cmd->add_option("-n,--n", grid_n, "number of grid points")->required();
  make_grid_cmd->add_option("-p,--p", grid_p, "dimension")->required();
  make_grid_cmd->add_option("--nR", grid_nr, "center-outward radii count");
  make_grid_cmd->add_option("--nS", grid_ns, "center-outward direction count");
  make_grid_cmd->add_option("--n0", grid_n0, "center-outward extra points");
  add_common_flags(make_grid_cmd, flags, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    resolve_seed(flags);

    if (ranksum->parsed() || rank_mmd->parsed()) {
      otr::Matrix x = otr::load_sample_csv(x_path);
      otr::Matrix y = otr::load_sample_csv(y_path);
      otr::PipelineOptions options = make_options(flags, static_cast<int>(x.cols()), false, std::nullopt);
      otr::TestReport report = ranksum->parsed() ? otr::run_ranksum(x, y, options)
                                                 : otr::run_rank_mmd(x, y, options);
      report.config["x"] = x_path;
      report.config["y"] = y_path;
      echo_threads(report, flags);
      emit(report, flags);
      return 0;
    }

    if (signedrank->parsed() || symmetry->parsed()) {
      otr::Matrix x = otr::load_sample_csv(x_path);
      otr::SymmetryGroup group = otr::SymmetryGroup::parse(flags.group, static_cast<int>(x.cols()));
      otr::PipelineOptions options = make_options(flags, static_cast<int>(x.cols()), true, group);
      otr::TestReport report = signedrank->parsed() ? otr::run_signedrank(x, group, options)
                                                    : otr::run_symmetry_mmd(x, group, options);
      report.config["x"] = x_path;
      echo_threads(report, flags);
      emit(report, flags);
      return 0;
    }

    if (hotelling->parsed()) {
      otr::Matrix x = otr::load_sample_csv(x_path);
      std::optional<otr::Matrix> y;
      if (!y_path.empty()) y = otr::load_sample_csv(y_path);
      otr::PipelineOptions options = make_options(flags, static_cast<int>(x.cols()), false, std::nullopt);
      otr::TestReport report = otr::run_hotelling(x, y, options);
      report.config["x"] = x_path;
      if (!y_path.empty()) report.config["y"] = y_path;
      echo_threads(report, flags);
      emit(report, flags);
      return 0;
    }

    if (power->parsed()) {
      std::vector<otr::Scenario> suite = otr::load_suite(suite_path);
      if (dry_run) {
        for (const otr::Scenario& s : suite) {
          std::cout << s.name << ": generator=" << otr::to_string(s.generator) << " n=" << s.n
                    << " p=" << s.p << " replications=" << s.replications << " tests=";
          for (std::size_t t = 0; t < s.tests.size(); ++t)
            std::cout << (t ? "," : "") << otr::to_string(s.tests[t]);
          std::cout << "\n";
        }
        return 0;
      }
      otr::HarnessOptions options;
      options.threads = flags.threads;
      options.cache_dir = flags.cache_dir;
      options.no_cache = flags.no_cache;
      options.progress = &std::cerr;
      otr::PowerTable table = otr::run_suite(suite, options);
      std::string text = long_format ? otr::power_table_long(table) : otr::power_table_csv(table);
      if (flags.out.empty()) {
        std::cout << text;
      } else {
        std::ofstream out(flags.out);
        if (!out) throw otr::InvalidInput("cannot open output file '" + flags.out + "'");
        out << text;
      }
      return 0;
    }

    if (returns->parsed()) {
      if (price_paths.size() < 2)
        throw otr::InvalidInput("returns: need at least 2 asset price files");
      std::vector<otr::PriceSeries> series;
      for (const std::string& path : price_paths) series.push_back(otr::load_price_csv(path));
      otr::ReturnsPanel panel = otr::prices_to_returns(series);
      otr::PipelineOptions options =
          make_options(flags, static_cast<int>(panel.returns.cols()), true, std::nullopt);
      otr::TestReport report = otr::exchangeability_report(panel, options);
      echo_threads(report, flags);
      emit(report, flags);
      return 0;
    }

    if (make_grid_cmd->parsed()) {
      otr::ReferenceGrid grid;
      if (grid_nr > 0 || grid_ns > 0) {
        grid = otr::center_outward_grid(grid_nr, grid_ns, grid_n0, grid_p, flags.seed);
      } else {
        otr::GridGenerator gen = flags.reference.empty() ? otr::GridGenerator::Gaussian
                                                         : otr::parse_grid_generator(flags.reference);
        grid = otr::make_grid(gen, grid_n, grid_p, flags.seed);
      }
      if (flags.out.empty()) throw otr::InvalidInput("make-grid: --out is required");
      otr::export_grid_csv(grid, flags.out);
      std::cerr << "wrote " << grid.size() << " x " << grid.dim() << " grid to " << flags.out << "\n";
      return 0;
    }
  } catch (const otr::InvalidInput& e) {
    std::cerr << "otrank: error: " << e.what() << "\n";
    return 2;
  } catch (const otr::NumericalError& e) {
    std::cerr << "otrank: numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "otrank: error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
