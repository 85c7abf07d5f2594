#include "otrank/report.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace otr {

std::string to_string(CalibrationMode mode) {
  return mode == CalibrationMode::MonteCarlo ? "monte_carlo" : "asymptotic_chisq";
}

std::map<std::string, double> summarize_null(std::vector<double> values) {
  std::map<std::string, double> out;
  if (values.empty()) return out;
  std::sort(values.begin(), values.end());
  auto quantile = [&](double q) {
    double pos = q * static_cast<double>(values.size() - 1);
    std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    std::size_t hi = static_cast<std::size_t>(std::ceil(pos));
    double frac = pos - static_cast<double>(lo);
    return values[lo] * (1.0 - frac) + values[hi] * frac;
  };
  out["min"] = values.front();
  out["q25"] = quantile(0.25);
  out["q50"] = quantile(0.50);
  out["q75"] = quantile(0.75);
  out["q90"] = quantile(0.90);
  out["q95"] = quantile(0.95);
  out["q99"] = quantile(0.99);
  out["max"] = values.back();
  return out;
}

std::string TestReport::to_json() const {
  nlohmann::json j;
  j["statistic_name"] = statistic_name;
  j["statistic"] = statistic;
  j["p_value"] = p_value;
  j["calibration"] = otr::to_string(calibration);
  if (calibration == CalibrationMode::MonteCarlo) {
    j["replicates"] = replicates;
    j["null_quantiles"] = null_quantiles;
  } else {
    j["chisq_df"] = chisq_df;
  }
  j["seed"] = seed;
  if (mc_fallback) j["mc_fallback"] = true;
  j["config"] = config;
  return j.dump(2) + "\n";
}

std::string TestReport::to_csv() const {
  std::string out;
  for (const auto& [key, value] : config) out += "# " + key + "=" + value + "\n";
  out += "statistic_name,statistic,p_value,calibration,replicates,chisq_df,seed\n";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", statistic);
  out += statistic_name + "," + buf + ",";
  std::snprintf(buf, sizeof buf, "%.17g", p_value);
  out += std::string(buf) + "," + otr::to_string(calibration) + "," + std::to_string(replicates) +
         "," + std::to_string(chisq_df) + "," + std::to_string(seed) + "\n";
  return out;
}

}  // namespace otr
