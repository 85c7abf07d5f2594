#include "otrank/ingestion.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace otr {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(tok);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_cell(const std::string& tok, int line_no, std::size_t col) {
  const char* begin = tok.data();
  const char* end = tok.data() + tok.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (end[-1] == ' ' || end[-1] == '\t' || end[-1] == '\r')) --end;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end)
    throw InvalidInput("csv: non-numeric cell at line " + std::to_string(line_no) + ", column " +
                       std::to_string(col + 1));
  return value;
}

}  // namespace

Matrix load_sample_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("csv: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput("csv: empty file '" + path + "'");
  const std::size_t p = split_csv_line(line).size();
  if (p == 0) throw InvalidInput("csv: empty header in '" + path + "'");
  std::vector<double> values;
  int line_no = 1;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != p)
      throw InvalidInput("csv: ragged row at line " + std::to_string(line_no) + " in '" + path +
                         "' (expected " + std::to_string(p) + " columns, found " +
                         std::to_string(cells.size()) + ")");
    for (std::size_t j = 0; j < p; ++j) values.push_back(parse_cell(cells[j], line_no, j));
    ++rows;
  }
  if (rows == 0) throw InvalidInput("csv: no data rows in '" + path + "'");
  Matrix out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(p));
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < p; ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[i * p + j];
  return out;
}

PriceSeries load_price_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("prices: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput("prices: empty file '" + path + "'");
  PriceSeries series;
  // Asset id from the file stem.
  std::size_t slash = path.find_last_of("/\\");
  std::string stem = slash == std::string::npos ? path : path.substr(slash + 1);
  std::size_t dot = stem.find_last_of('.');
  series.asset = dot == std::string::npos ? stem : stem.substr(0, dot);
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != 2)
      throw InvalidInput("prices: expected 'date,adj_close' at line " + std::to_string(line_no) +
                         " in '" + path + "'");
    std::string date = cells[0];
    while (!date.empty() && (date.back() == '\r' || date.back() == ' ')) date.pop_back();
    double price = parse_cell(cells[1], line_no, 1);
    if (!(price > 0.0))
      throw InvalidInput("prices: nonpositive price at line " + std::to_string(line_no) + " in '" +
                         path + "'");
    if (!series.dates.empty() && date <= series.dates.back())
      throw InvalidInput("prices: dates must be strictly increasing at line " +
                         std::to_string(line_no) + " in '" + path + "'");
    series.dates.push_back(std::move(date));
    series.prices.push_back(price);
  }
  if (series.dates.size() < 2)
    throw InvalidInput("prices: need at least 2 observations in '" + path + "'");
  return series;
}

ReturnsPanel prices_to_returns(const std::vector<PriceSeries>& series) {
  if (series.empty()) throw InvalidInput("returns: no price series given");
  // Common dates: intersection, kept in chronological (ISO string) order.
  std::vector<std::string> common = series[0].dates;
  for (std::size_t a = 1; a < series.size(); ++a) {
    std::vector<std::string> next;
    const auto& dates = series[a].dates;
    std::set_intersection(common.begin(), common.end(), dates.begin(), dates.end(),
                          std::back_inserter(next));
    common = std::move(next);
  }
  if (common.size() < 2)
    throw InvalidInput("returns: fewer than 2 dates common to all assets");
  const Eigen::Index t = static_cast<Eigen::Index>(common.size() - 1);
  const Eigen::Index p = static_cast<Eigen::Index>(series.size());
  ReturnsPanel panel;
  panel.returns.resize(t, p);
  for (std::size_t a = 0; a < series.size(); ++a) {
    panel.assets.push_back(series[a].asset);
    std::map<std::string, double> by_date;
    for (std::size_t k = 0; k < series[a].dates.size(); ++k)
      by_date[series[a].dates[k]] = series[a].prices[k];
    for (Eigen::Index row = 0; row < t; ++row) {
      double prev = by_date.at(common[static_cast<std::size_t>(row)]);
      double cur = by_date.at(common[static_cast<std::size_t>(row) + 1]);
      panel.returns(row, static_cast<Eigen::Index>(a)) = cur / prev - 1.0;
    }
  }
  panel.dates.assign(common.begin() + 1, common.end());
  return panel;
}

TestReport exchangeability_report(const ReturnsPanel& panel, const PipelineOptions& options) {
  const Eigen::Index p = panel.returns.cols();
  const Eigen::Index n = panel.returns.rows();
  if (p < 2) throw InvalidInput("exchangeability: need at least 2 assets");
  if (n < 10) throw InvalidInput("exchangeability: need at least 10 return rows");
  PipelineOptions opts = options;
  opts.reference = GridGenerator::SortedGaussian;
  SymmetryGroup group = SymmetryGroup::permutation(static_cast<int>(p));
  TestReport report = run_symmetry_mmd(panel.returns, group, opts);
  report.config["test"] = "returns_exchangeability";
  std::string assets;
  for (const std::string& a : panel.assets) assets += (assets.empty() ? "" : ",") + a;
  report.config["assets"] = assets;
  return report;
}

}  // namespace otr
