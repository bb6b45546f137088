#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "mobagg/core/series.h"
#include "mobagg/forecast/arma.h"
#include "mobagg/timeseries/errors.h"
#include "mobagg/timeseries/seasonal.h"

namespace mobagg::forecast {

struct RollingOptions {
  std::size_t train_days = 5;
  // Fixed order; when empty the order is chosen by AIC on the training window.
  std::optional<ArmaOrder> order;
  std::size_t p_max = 5;
  std::size_t q_max = 5;
  // false gives the black-box baseline: ARMA fitted directly on Y.
  bool deseasonalize = true;
};

struct RollingForecast {
  RoiTimeSeries actual;     // the test day's observations
  RoiTimeSeries predicted;  // one-step forecasts for the same epochs
  ts::ForecastErrors errors;
  std::vector<bool> fallback;  // slot used the seasonal mean because the fit failed
  std::optional<ArmaModel> model;
};

// Forecasts the 24 hourly slots of day `test_day` (counted from the series
// start). The model is fitted once on the preceding `train_days` days; each
// slot is then predicted one step ahead and the window slides over the true
// observation. With de-seasonalization, Y hat = D hat + seasonal mean.
RollingForecast rolling_forecast(const RoiTimeSeries& series, const ts::SeasonalProfile& profile,
                                 std::size_t test_day, const RollingOptions& options = {});

// Fits the order/model that rolling_forecast would use on a training window.
ArmaModel fit_window(std::span<const double> window, const RollingOptions& options);

}  // namespace mobagg::forecast
