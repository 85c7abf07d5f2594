#pragma once

// Data ingestion for real analyses: numeric CSV samples and the monthly
// financial-returns pipeline (per-asset price files to a returns panel).

#include "otrank/types.hpp"

#include <string>
#include <vector>

namespace otr {

/// Rectangular numeric CSV with a header row. Rejects ragged rows and
/// non-numeric cells with row/column diagnostics.
Matrix load_sample_csv(const std::string& path);

struct PriceSeries {
  std::string asset;
  std::vector<std::string> dates;  // ISO-8601, strictly increasing
  std::vector<double> prices;     // adjusted close, > 0
};

/// One file per asset with header "date,adj_close".
PriceSeries load_price_csv(const std::string& path);

struct ReturnsPanel {
  std::vector<std::string> assets;
  std::vector<std::string> dates;  // date of each return row (the later date)
  Matrix returns;                  // T x p simple returns
};

/// Aligns the series on their common dates (intersection) and computes
/// simple returns R_t = P_t / P_{t-1} - 1 between consecutive common dates.
ReturnsPanel prices_to_returns(const std::vector<PriceSeries>& series);

}  // namespace otr

#include "otrank/pipelines.hpp"

namespace otr {

/// Tests whether the assets' returns are exchangeable: OT-MMD symmetry test
/// with the permutation group and a sorted-Gaussian reference. Requires
/// p >= 2 assets and n >= 10 return rows.
TestReport exchangeability_report(const ReturnsPanel& panel, const PipelineOptions& options);

}  // namespace otr
