#include "otrank/pipelines.hpp"

#include "otrank/random.hpp"

namespace otr {

namespace {

Kernel resolve_kernel(const PipelineOptions& options, int p) {
  return options.kernel ? *options.kernel : Kernel::gaussian(default_gaussian_bandwidth(p));
}

ReferenceGrid resolve_grid(const PipelineOptions& options, int n, int p) {
  if (options.custom_grid) {
    if (options.custom_grid->size() != n)
      throw InvalidInput("pipeline: custom grid has " + std::to_string(options.custom_grid->size()) +
                         " rows, expected " + std::to_string(n));
    if (options.custom_grid->dim() != p)
      throw InvalidInput("pipeline: custom grid dimension mismatch");
    return *options.custom_grid;
  }
  return make_grid(options.reference, n, p, derive_seed(options.seed, 0x981d));
}

// Sigma_ERD / Sigma_ERD1 with a Monte Carlo fallback when no closed form
// exists (custom grids, unusual base/group combinations). The fallback draw
// count keeps the entrywise standard error around 1e-3.
constexpr long long kSigmaMcDraws = 200000;

ScoreCovariance resolve_sigma(const PipelineOptions& options, const ReferenceGrid& grid, int p,
                              const std::optional<SymmetryGroup>& group, bool* mc_fallback) {
  *mc_fallback = false;
  if (!options.custom_grid) {
    try {
      return erd_covariance_closed_form(options.reference, options.score, p, group);
    } catch (const InvalidInput&) {
      // fall through to Monte Carlo
    }
  }
  *mc_fallback = true;
  Rng rng(derive_seed(options.seed, 0xe5d));
  SymmetrizedReference ref =
      group ? SymmetrizedReference::from_grid(grid, *group)
            : SymmetrizedReference::from_grid(grid, SymmetryGroup::trivial(p));
  return erd_covariance_monte_carlo(ref, options.score, kSigmaMcDraws, rng);
}

std::vector<double> null_sample_for(const NullModel& model, const PipelineOptions& options) {
  if (options.cache_dir && !options.no_cache)
    return NullCache(*options.cache_dir).get(model, options.threads);
  return simulate_null(model, options.threads);
}

void echo_common(TestReport& report, const PipelineOptions& options, int p) {
  report.seed = options.seed;
  report.config["seed"] = std::to_string(options.seed);
  report.config["score"] = options.score.describe();
  report.config["p"] = std::to_string(p);
  if (options.jitter > 0.0) report.config["jitter"] = std::to_string(options.jitter);
}

TestReport monte_carlo_report(const std::string& name, double observed, const NullModel& model,
                              const PipelineOptions& options) {
  std::vector<double> nulls = null_sample_for(model, options);
  TestReport report;
  report.statistic_name = name;
  report.statistic = observed;
  report.calibration = CalibrationMode::MonteCarlo;
  report.replicates = model.replicates;
  report.p_value = p_value(observed, nulls);
  report.null_quantiles = summarize_null(std::move(nulls));
  return report;
}

}  // namespace

GridGenerator default_reference_for(const SymmetryGroup& group) {
  switch (group.kind()) {
    case GroupKind::Spherical: return GridGenerator::ChiNormAxis;
    case GroupKind::Permutation: return GridGenerator::SortedGaussian;
    default: return GridGenerator::Gaussian;
  }
}

Matrix apply_jitter(MatrixRef sample, double eps, Rng& rng) {
  if (eps <= 0.0) return sample;
  std::uniform_real_distribution<double> dist(-eps, eps);
  Matrix out = sample;
  for (Eigen::Index i = 0; i < out.rows(); ++i)
    for (Eigen::Index j = 0; j < out.cols(); ++j) out(i, j) += dist(rng);
  return out;
}

TestReport run_ranksum(MatrixRef x, MatrixRef y, const PipelineOptions& options) {
  const int p = static_cast<int>(x.cols());
  Rng rng(derive_seed(options.seed, 0x8a11));
  Matrix xd = apply_jitter(x, options.jitter, rng);
  Matrix yd = apply_jitter(y, options.jitter, rng);
  ReferenceGrid grid = resolve_grid(options, static_cast<int>(x.rows() + y.rows()), p);
  bool sigma_mc = false;
  ScoreCovariance sigma = resolve_sigma(options, grid, p, std::nullopt, &sigma_mc);
  auto [xr, yr] = pooled_rank_map(xd, yd, grid);
  double observed = ranksum_stat(xr, yr, options.score, sigma);

  TestReport report;
  if (options.calibration == CalibrationMode::AsymptoticChisq) {
    report.statistic_name = "ranksum";
    report.statistic = observed;
    report.calibration = CalibrationMode::AsymptoticChisq;
    report.chisq_df = p;
    report.p_value = asymptotic_pvalue_chisq(observed, p);
  } else {
    NullModel model;
    model.test = TestKind::RankSum;
    model.grid = grid;
    model.m = static_cast<int>(x.rows());
    model.n = static_cast<int>(y.rows());
    model.score = options.score;
    model.sigma = sigma;
    model.replicates = options.replicates;
    model.seed = derive_seed(options.seed, 0x41b);
    report = monte_carlo_report("ranksum", observed, model, options);
  }
  report.mc_fallback = sigma_mc;
  echo_common(report, options, p);
  report.config["test"] = "ranksum";
  report.config["m"] = std::to_string(x.rows());
  report.config["n"] = std::to_string(y.rows());
  report.config["reference"] = to_string(options.reference);
  report.config["calibration"] = to_string(options.calibration);
  report.config["B"] = std::to_string(options.replicates);
  return report;
}

TestReport run_rank_mmd(MatrixRef x, MatrixRef y, const PipelineOptions& options) {
  const int p = static_cast<int>(x.cols());
  Kernel kernel = resolve_kernel(options, p);
  Rng rng(derive_seed(options.seed, 0x8a11));
  Matrix xd = apply_jitter(x, options.jitter, rng);
  Matrix yd = apply_jitter(y, options.jitter, rng);
  ReferenceGrid grid = resolve_grid(options, static_cast<int>(x.rows() + y.rows()), p);
  auto [xr, yr] = pooled_rank_map(xd, yd, grid);
  double observed = rank_mmd_stat(xr, yr, options.score, kernel);

  NullModel model;
  model.test = TestKind::RankMmd;
  model.grid = grid;
  model.m = static_cast<int>(x.rows());
  model.n = static_cast<int>(y.rows());
  model.score = options.score;
  model.kernel = kernel;
  model.replicates = options.replicates;
  model.seed = derive_seed(options.seed, 0x41b);
  TestReport report = monte_carlo_report("rank_mmd", observed, model, options);
  echo_common(report, options, p);
  report.config["test"] = "rank_mmd";
  report.config["m"] = std::to_string(x.rows());
  report.config["n"] = std::to_string(y.rows());
  report.config["reference"] = to_string(options.reference);
  report.config["kernel"] = kernel.describe();
  report.config["B"] = std::to_string(options.replicates);
  return report;
}

TestReport run_signedrank(MatrixRef x, const SymmetryGroup& group, const PipelineOptions& options) {
  const int p = static_cast<int>(x.cols());
  if (x.rows() < 1) throw InvalidInput("signedrank: empty sample");
  Rng rng(derive_seed(options.seed, 0x8a11));
  Matrix xd = apply_jitter(x, options.jitter, rng);
  ReferenceGrid grid = resolve_grid(options, static_cast<int>(x.rows()), p);
  bool sigma_mc = false;
  ScoreCovariance sigma = resolve_sigma(options, grid, p, group, &sigma_mc);
  Rng sign_rng(derive_seed(options.seed, 0x51c));
  RankAssignment assignment = signed_rank_map(xd, grid, group, sign_rng);
  Vector w = signed_rank_stat(assignment, group, options.score);
  double observed = signed_rank_quadform(w, sigma);

  TestReport report;
  if (options.calibration == CalibrationMode::AsymptoticChisq) {
    report.statistic_name = "signedrank_quadform";
    report.statistic = observed;
    report.calibration = CalibrationMode::AsymptoticChisq;
    report.chisq_df = p;
    report.p_value = asymptotic_pvalue_chisq(observed, p);
  } else {
    NullModel model;
    model.test = TestKind::SignedRank;
    model.grid = grid;
    model.group = group;
    model.n = static_cast<int>(x.rows());
    model.score = options.score;
    model.sigma = sigma;
    model.replicates = options.replicates;
    model.seed = derive_seed(options.seed, 0x41b);
    report = monte_carlo_report("signedrank_quadform", observed, model, options);
  }
  report.mc_fallback = sigma_mc;
  echo_common(report, options, p);
  report.config["test"] = "signedrank";
  report.config["n"] = std::to_string(x.rows());
  report.config["group"] = group.describe();
  report.config["reference"] = to_string(options.reference);
  report.config["calibration"] = to_string(options.calibration);
  report.config["B"] = std::to_string(options.replicates);
  return report;
}

TestReport run_symmetry_mmd(MatrixRef x, const SymmetryGroup& group, const PipelineOptions& options) {
  const int p = static_cast<int>(x.cols());
  if (x.rows() < 1) throw InvalidInput("symmetry_mmd: empty sample");
  Kernel kernel = resolve_kernel(options, p);
  if (kernel.kind != Kernel::Kind::Gaussian)
    throw InvalidInput("symmetry_mmd: only the gaussian kernel has closed-form nu_S expectations; "
                       "other kernels are not supported in this pipeline");
  Rng rng(derive_seed(options.seed, 0x8a11));
  Matrix xd = apply_jitter(x, options.jitter, rng);
  ReferenceGrid grid = resolve_grid(options, static_cast<int>(x.rows()), p);
  Rng sign_rng(derive_seed(options.seed, 0x51c));
  RankAssignment assignment = signed_rank_map(xd, grid, group, sign_rng);
  double observed = symmetry_mmd_stat(assignment.signed_ranks, kernel.sigma);

  NullModel model;
  model.test = TestKind::SymmetryMmd;
  model.grid = grid;
  model.group = group;
  model.n = static_cast<int>(x.rows());
  model.kernel = kernel;
  model.replicates = options.replicates;
  model.seed = derive_seed(options.seed, 0x41b);
  TestReport report = monte_carlo_report("symmetry_mmd", observed, model, options);
  echo_common(report, options, p);
  report.config["test"] = "symmetry_mmd";
  report.config["n"] = std::to_string(x.rows());
  report.config["group"] = group.describe();
  report.config["reference"] = to_string(options.reference);
  report.config["kernel"] = kernel.describe();
  report.config["B"] = std::to_string(options.replicates);
  return report;
}

TestReport run_hotelling(MatrixRef x, const std::optional<Matrix>& y, const PipelineOptions& options) {
  const int p = static_cast<int>(x.cols());
  double observed = y ? hotelling_two_sample(x, *y) : hotelling_one_sample(x);
  TestReport report;
  report.statistic_name = y ? "hotelling_two_sample" : "hotelling_one_sample";
  report.statistic = observed;
  report.calibration = CalibrationMode::AsymptoticChisq;
  report.chisq_df = p;
  report.p_value = asymptotic_pvalue_chisq(observed, p);
  echo_common(report, options, p);
  report.config["test"] = "hotelling";
  report.config["n"] = std::to_string(x.rows());
  if (y) report.config["m2"] = std::to_string(y->rows());
  report.config["calibration"] = "asymptotic_chisq";
  return report;
}

}  // namespace otr
