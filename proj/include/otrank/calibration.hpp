#pragma once

// Distribution-free Monte Carlo null simulation and asymptotic chi-squared
// calibration. Null laws depend only on the reference grid, the group, the
// statistic configuration and the sizes - never on observed data - so null
// samples are cacheable on disk.

#include "otrank/statistics.hpp"
#include "otrank/types.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace otr {

enum class TestKind { RankSum, RankMmd, SignedRank, SymmetryMmd, RecenteredMmd };

std::string to_string(TestKind kind);

struct NullModel {
  TestKind test = TestKind::SymmetryMmd;
  ReferenceGrid grid;
  std::optional<SymmetryGroup> group;       // one-sample tests
  int m = 0;                                // two-sample tests: first block size
  int n = 0;
  ScoreFunction score;
  Kernel kernel = Kernel::gaussian(1.0);
  std::optional<ScoreCovariance> sigma;     // quadratic-form statistics
  int replicates = 999;
  std::uint64_t seed = 0;

  /// Canonical cache key text (grid content hashed).
  std::string cache_key() const;
};

/// B i.i.d. draws from the exact finite-sample null law of the statistic.
/// Two-sample nulls permute grid points between the blocks; symmetry nulls
/// compose a uniform grid permutation with i.i.d. uniform group elements
/// applied per point. Reproducible from the model seed at any thread count.
std::vector<double> simulate_null(const NullModel& model, int threads = 1);

/// Finite-sample valid right-tail p-value (1 + #{null >= observed}) / (B + 1);
/// ties count toward the numerator.
double p_value(double observed, std::span<const double> null_sample);

/// The table-reproduction rule: reject when the observed value is greater
/// than a fraction (1 - alpha) of the simulated nulls.
bool reject_paper_rule(double observed, std::span<const double> null_sample, double alpha);

/// Upper-tail probability of chi^2_p at observed.
double asymptotic_pvalue_chisq(double observed, int p);

/// Disk cache for null samples, keyed by the null model. Values round-trip
/// exactly (17 significant digits); writes are atomic (temp file + rename).
class NullCache {
 public:
  explicit NullCache(std::string directory);

  std::optional<std::vector<double>> load(const NullModel& model) const;
  void store(const NullModel& model, const std::vector<double>& values) const;

  /// Cached simulate_null: load on hit, simulate + store on miss.
  std::vector<double> get(const NullModel& model, int threads = 1, bool bypass = false) const;

  const std::string& directory() const { return dir_; }

 private:
  std::string path_for(const NullModel& model) const;
  std::string dir_;
};

}  // namespace otr
