#include "mobagg/timeseries/stationarity.h"

#include <array>
#include <cmath>
#include <limits>

#include "mobagg/core/error.h"
#include "mobagg/core/linalg.h"

namespace mobagg::ts {
namespace {

// Fuller (1976), tau_mu. Last column is the asymptotic value.
constexpr std::array<double, 6> kSizes{25, 50, 100, 250, 500, std::numeric_limits<double>::infinity()};
constexpr std::array<double, 6> kOnePercent{-3.75, -3.58, -3.51, -3.46, -3.44, -3.43};
constexpr std::array<double, 6> kFivePercent{-3.00, -2.93, -2.89, -2.88, -2.87, -2.86};

}  // namespace

double adf_critical_value(std::size_t n, double confidence) {
  const std::array<double, 6>* table = nullptr;
  if (std::abs(confidence - 0.95) < 1e-12) {
    table = &kFivePercent;
  } else if (std::abs(confidence - 0.99) < 1e-12) {
    table = &kOnePercent;
  } else {
    throw ValidationError("ADF confidence must be 0.95 or 0.99");
  }
  const double x = 1.0 / static_cast<double>(n);
  if (x >= 1.0 / kSizes[0]) return (*table)[0];
  for (std::size_t i = 0; i + 1 < kSizes.size(); ++i) {
    const double hi = 1.0 / kSizes[i];
    const double lo = 1.0 / kSizes[i + 1];
    if (x <= hi && x >= lo) {
      const double w = (x - lo) / (hi - lo);
      return w * (*table)[i] + (1.0 - w) * (*table)[i + 1];
    }
  }
  return table->back();
}

AdfResult adf_stationary(std::span<const double> y, double confidence) {
  const std::size_t n = y.size();
  if (n < 30) throw ValidationError("ADF test requires at least 30 observations");
  AdfResult result;
  result.critical_value = adf_critical_value(n, confidence);
  result.lags = static_cast<std::size_t>(std::floor(std::cbrt(static_cast<double>(n - 1))));

  bool constant = true;
  for (double v : y) {
    if (!std::isfinite(v)) throw ValidationError("ADF input must be finite");
    constant = constant && v == y[0];
  }
  if (constant) {
    result.statistic = -std::numeric_limits<double>::infinity();
    result.stationary = true;
    return result;
  }

  const std::size_t k = result.lags;
  const auto rows = static_cast<Eigen::Index>(n - 1 - k);
  const auto cols = static_cast<Eigen::Index>(2 + k);
  Eigen::MatrixXd x(rows, cols);
  Eigen::VectorXd target(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const std::size_t t = static_cast<std::size_t>(r) + k + 1;
    target(r) = y[t] - y[t - 1];
    x(r, 0) = 1.0;
    x(r, 1) = y[t - 1];
    for (std::size_t i = 1; i <= k; ++i) x(r, static_cast<Eigen::Index>(1 + i)) = y[t - i] - y[t - i - 1];
  }
  const auto fit = least_squares(x, target);
  if (!fit.full_rank) throw ValidationError("degenerate ADF regression");
  const double beta = fit.beta(1);
  if (fit.rss == 0.0) {
    result.statistic = beta < 0 ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
  } else {
    result.statistic = beta / coefficient_std_errors(x, fit)(1);
  }
  result.stationary = result.statistic < result.critical_value;
  return result;
}

}  // namespace mobagg::ts
