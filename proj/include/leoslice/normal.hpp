#pragma once

#include <span>

namespace leoslice {

/// Standard normal CDF.
double normal_cdf(double x);

/// Inverse standard normal CDF by bisection on normal_cdf, |error| <= 1e-10.
/// Requires 0 < p < 1.
double normal_quantile(double p);

/// Numerically stable log(mean(exp(values))).
double log_mean_exp(std::span<const double> values);

}  // namespace leoslice
