#pragma once

// Special functions and small statistical utilities: regularized incomplete
// gamma (chi-squared tails), normal CDF/quantile, Kolmogorov-Smirnov.

#include "otrank/types.hpp"

#include <span>

namespace otr {

/// Standard normal CDF.
double normal_cdf(double x);

/// Standard normal quantile, |error| < 1e-13 (Acklam's rational approximation
/// plus one Halley refinement step).
double normal_quantile(double u);

/// Regularized lower incomplete gamma P(a,x), accurate to ~1e-14.
double gamma_p(double a, double x);

/// Regularized upper incomplete gamma Q(a,x) = 1 - P(a,x).
double gamma_q(double a, double x);

/// Upper-tail probability of a chi-squared distribution with df degrees of
/// freedom, i.e. P(X > x). Throws InvalidInput for x < 0 or df < 1.
double chisq_upper_tail(double x, int df);

/// Survival function of the Kolmogorov distribution,
/// Q(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2).
double kolmogorov_q(double lambda);

struct KsResult {
  double statistic;  // sup |F1 - F2|
  double p_value;    // asymptotic, with small-sample correction
};

/// Two-sample Kolmogorov-Smirnov test on scalar samples.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

}  // namespace otr
