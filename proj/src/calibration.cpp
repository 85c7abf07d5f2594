#include "otrank/calibration.hpp"

#include "otrank/parallel.hpp"
#include "otrank/random.hpp"
#include "otrank/special.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

namespace otr {

std::string to_string(TestKind kind) {
  switch (kind) {
    case TestKind::RankSum: return "ranksum";
    case TestKind::RankMmd: return "rank_mmd";
    case TestKind::SignedRank: return "signedrank";
    case TestKind::SymmetryMmd: return "symmetry_mmd";
    case TestKind::RecenteredMmd: return "recentered_mmd";
  }
  return "?";
}

namespace {

std::uint64_t fnv1a_bytes(const void* data, std::size_t size, std::uint64_t h) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t grid_hash(const ReferenceGrid& grid) {
  std::uint64_t h = 1469598103934665603ULL;
  h = fnv1a_bytes(grid.points.data(),
                  static_cast<std::size_t>(grid.points.size()) * sizeof(double), h);
  return h;
}

int grid_size(const NullModel& model) { return static_cast<int>(model.grid.size()); }

void validate(const NullModel& model) {
  if (model.replicates < 1) throw InvalidInput("simulate_null: replicate count must be >= 1");
  const bool two_sample = model.test == TestKind::RankSum || model.test == TestKind::RankMmd;
  if (two_sample) {
    if (model.m < 1 || model.n < 1) throw InvalidInput("simulate_null: need m, n >= 1");
    if (model.m + model.n != grid_size(model))
      throw InvalidInput("simulate_null: grid size must equal m + n");
  } else {
    if (!model.group) throw InvalidInput("simulate_null: one-sample null needs a group");
    if (model.n != grid_size(model)) throw InvalidInput("simulate_null: grid size must equal n");
    if (model.group->dim() != static_cast<int>(model.grid.dim()))
      throw InvalidInput("simulate_null: group/grid dimension mismatch");
  }
  if (model.test == TestKind::SignedRank && !model.score.is_identity()) {
    switch (model.group->kind()) {
      case GroupKind::Trivial:
      case GroupKind::Central:
      case GroupKind::Sign:
      case GroupKind::Permutation:
        break;
      default:
        throw InvalidInput(
            "simulate_null: non-identity scores require a componentwise-acting group");
    }
  }
  if ((model.test == TestKind::RankSum || model.test == TestKind::SignedRank) && !model.sigma)
    throw InvalidInput("simulate_null: quadratic-form statistics need a score covariance");
}

}  // namespace

std::string NullModel::cache_key() const {
  std::ostringstream os;
  os << "test=" << otr::to_string(test) << "|m=" << m << "|n=" << n << "|p=" << grid.dim()
     << "|group=" << (group ? group->describe() : "none") << "|grid=" << otr::to_string(grid.generator)
     << ":" << std::hex << grid_hash(grid) << std::dec << "|score=" << score.describe()
     << "|kernel=" << kernel.describe() << "|B=" << replicates << "|seed=" << seed;
  if (sigma) {
    std::uint64_t h = 1469598103934665603ULL;
    h = fnv1a_bytes(sigma->matrix.data(),
                    static_cast<std::size_t>(sigma->matrix.size()) * sizeof(double), h);
    os << "|sigma=" << std::hex << h << std::dec;
  }
  return os.str();
}

std::vector<double> simulate_null(const NullModel& model, int threads) {
  validate(model);
  const int total = grid_size(model);
  std::vector<double> out(static_cast<std::size_t>(model.replicates));

  // Work shared by every replicate.
  Matrix scored_grid = model.score.apply_rows(model.grid.points);
  std::optional<RecenteredMmd> recentered;
  if (model.test == TestKind::RecenteredMmd)
    recentered.emplace(model.grid, *model.group, model.kernel);

  parallel_for(model.replicates, threads, [&](std::int64_t b) {
    Rng rng(derive_seed(model.seed, static_cast<std::uint64_t>(b)));
    switch (model.test) {
      case TestKind::RankSum:
      case TestKind::RankMmd: {
        std::vector<int> perm = random_permutation(total, rng);
        Matrix xr(model.m, model.grid.dim());
        Matrix yr(model.n, model.grid.dim());
        for (int i = 0; i < model.m; ++i) xr.row(i) = model.grid.points.row(perm[static_cast<std::size_t>(i)]);
        for (int j = 0; j < model.n; ++j)
          yr.row(j) = model.grid.points.row(perm[static_cast<std::size_t>(model.m + j)]);
        if (model.test == TestKind::RankSum) {
          out[static_cast<std::size_t>(b)] = ranksum_stat(xr, yr, model.score, *model.sigma);
        } else {
          out[static_cast<std::size_t>(b)] = rank_mmd_stat(xr, yr, model.score, model.kernel);
        }
        return;
      }
      case TestKind::SignedRank: {
        std::vector<int> perm = random_permutation(total, rng);
        Vector w = Vector::Zero(model.grid.dim());
        for (int i = 0; i < model.n; ++i) {
          GroupElement s = sample_element_uniform(*model.group, rng);
          w += apply(*model.group, s, scored_grid.row(perm[static_cast<std::size_t>(i)]));
        }
        w /= std::sqrt(static_cast<double>(model.n));
        out[static_cast<std::size_t>(b)] = signed_rank_quadform(w, *model.sigma);
        return;
      }
      case TestKind::SymmetryMmd:
      case TestKind::RecenteredMmd: {
        std::vector<int> perm = random_permutation(total, rng);
        Matrix u(model.n, model.grid.dim());
        for (int i = 0; i < model.n; ++i)
          u.row(i) =
              sample_orbit_uniform(*model.group, model.grid.points.row(perm[static_cast<std::size_t>(i)]), rng)
                  .transpose();
        if (model.test == TestKind::SymmetryMmd) {
          if (model.kernel.kind != Kernel::Kind::Gaussian)
            throw InvalidInput("simulate_null: symmetry MMD null supports the gaussian kernel only");
          out[static_cast<std::size_t>(b)] = symmetry_mmd_stat(u, model.kernel.sigma);
        } else {
          out[static_cast<std::size_t>(b)] = (*recentered)(u);
        }
        return;
      }
    }
  });
  return out;
}

double p_value(double observed, std::span<const double> null_sample) {
  if (null_sample.empty()) throw InvalidInput("p_value: empty null sample");
  std::size_t count = 0;
  for (double v : null_sample)
    if (v >= observed) ++count;
  return static_cast<double>(1 + count) / static_cast<double>(null_sample.size() + 1);
}

bool reject_paper_rule(double observed, std::span<const double> null_sample, double alpha) {
  if (null_sample.empty()) throw InvalidInput("reject_paper_rule: empty null sample");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidInput("reject_paper_rule: alpha must be in (0,1)");
  std::size_t below = 0;
  for (double v : null_sample)
    if (v < observed) ++below;
  return static_cast<double>(below) >=
         (1.0 - alpha) * static_cast<double>(null_sample.size());
}

double asymptotic_pvalue_chisq(double observed, int p) {
  if (observed < 0.0) throw InvalidInput("asymptotic_pvalue_chisq: statistic must be >= 0");
  return chisq_upper_tail(observed, p);
}

NullCache::NullCache(std::string directory) : dir_(std::move(directory)) {}

std::string NullCache::path_for(const NullModel& model) const {
  std::string key = model.cache_key();
  std::uint64_t h = fnv1a_bytes(key.data(), key.size(), 1469598103934665603ULL);
  std::ostringstream os;
  os << dir_ << "/" << otr::to_string(model.test) << "_" << std::hex << h << ".csv";
  return os.str();
}

std::optional<std::vector<double>> NullCache::load(const NullModel& model) const {
  std::ifstream in(path_for(model));
  if (!in) return std::nullopt;
  std::string line;
  if (!std::getline(in, line) || line != "# otrank null sample v1") return std::nullopt;
  if (!std::getline(in, line) || line != "# " + model.cache_key()) return std::nullopt;
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(model.replicates));
  try {
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      values.push_back(std::stod(line));
    }
  } catch (const std::exception&) {
    return std::nullopt;  // corrupt cache entry: regenerate
  }
  if (static_cast<int>(values.size()) != model.replicates) return std::nullopt;
  return values;
}

void NullCache::store(const NullModel& model, const std::vector<double>& values) const {
  std::filesystem::create_directories(dir_);
  std::string final_path = path_for(model);
  std::string tmp_path = final_path + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp_path);
    if (!out) throw InvalidInput("null cache: cannot write '" + tmp_path + "'");
    out << "# otrank null sample v1\n# " << model.cache_key() << "\n";
    char buf[40];
    for (double v : values) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << buf << "\n";
    }
    if (!out) throw InvalidInput("null cache: write failed for '" + tmp_path + "'");
  }
  std::filesystem::rename(tmp_path, final_path);
}

std::vector<double> NullCache::get(const NullModel& model, int threads, bool bypass) const {
  if (!bypass) {
    if (auto cached = load(model)) return *cached;
  }
  std::vector<double> values = simulate_null(model, threads);
  if (!bypass) store(model, values);
  return values;
}

}  // namespace otr
