#pragma once

// Machine-readable test reports. Every run echoes its full configuration so
// that the report is reproducible bit-for-bit from the echo alone.

#include "otrank/types.hpp"

#include <map>
#include <string>
#include <vector>

namespace otr {

enum class CalibrationMode { MonteCarlo, AsymptoticChisq };

std::string to_string(CalibrationMode mode);

struct TestReport {
  std::string statistic_name;
  double statistic = 0.0;
  double p_value = 1.0;
  CalibrationMode calibration = CalibrationMode::MonteCarlo;
  int replicates = 0;                   // Monte Carlo mode
  int chisq_df = 0;                     // asymptotic mode
  std::map<std::string, double> null_quantiles;  // Monte Carlo mode
  std::uint64_t seed = 0;
  bool mc_fallback = false;             // expectations estimated by Monte Carlo
  std::map<std::string, std::string> config;  // full run configuration echo

  std::string to_json() const;
  std::string to_csv() const;
};

/// Quantile summary (min/25%/50%/75%/90%/95%/99%/max) of a null sample.
std::map<std::string, double> summarize_null(std::vector<double> values);

}  // namespace otr
