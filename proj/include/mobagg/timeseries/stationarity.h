#pragma once

#include <cstddef>
#include <span>

namespace mobagg::ts {

struct AdfResult {
  bool stationary = false;  // unit root rejected at the requested confidence
  double statistic = 0.0;   // t-ratio of the lagged level; -inf for a constant series
  double critical_value = 0.0;
  std::size_t lags = 0;
};

// Augmented Dickey-Fuller test with a constant and no trend:
//   dy_t = a + b y_{t-1} + sum_{i=1..k} g_i dy_{t-i} + e_t,  k = floor((n-1)^(1/3)).
// confidence must be 0.95 or 0.99; requires n >= 30.
AdfResult adf_stationary(std::span<const double> series, double confidence = 0.95);

// Dickey-Fuller critical value (constant, no trend) for sample size n,
// linearly interpolated in 1/n between tabulated sizes.
double adf_critical_value(std::size_t n, double confidence);

}  // namespace mobagg::ts
