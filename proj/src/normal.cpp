#include "leoslice/normal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace leoslice {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("normal_quantile: p must lie in (0, 1)");
  }
  double lo = -40.0;
  double hi = 40.0;
  while (hi - lo > 1e-11) {
    const double mid = 0.5 * (lo + hi);
    if (normal_cdf(mid) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double log_mean_exp(std::span<const double> values) {
  if (values.empty()) {
    throw std::invalid_argument("log_mean_exp: empty input");
  }
  const double peak = *std::max_element(values.begin(), values.end());
  if (!std::isfinite(peak)) {
    return peak;
  }
  double acc = 0.0;
  for (double v : values) {
    acc += std::exp(v - peak);
  }
  return peak + std::log(acc / static_cast<double>(values.size()));
}

}  // namespace leoslice
