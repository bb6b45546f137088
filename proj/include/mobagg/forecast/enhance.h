#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include "mobagg/core/series.h"
#include "mobagg/forecast/rolling.h"
#include "mobagg/forecast/var.h"
#include "mobagg/timeseries/errors.h"
#include "mobagg/timeseries/seasonal.h"

namespace mobagg::forecast {

struct EnhanceOptions {
  // Training window for both the VAR and the local ARMA it is compared to.
  std::size_t train_days = 14;
  // VAR order; defaults to the local ARMA's p clamped to [1, max_var_order].
  std::optional<std::size_t> var_order;
  std::size_t max_var_order = 3;
  std::optional<ArmaOrder> arma_order;
  std::size_t p_max = 5;
  std::size_t q_max = 5;
};

struct EnhancedForecast {
  RoiTimeSeries actual;
  RoiTimeSeries predicted;  // VAR forecasts, reseasonalized
  RoiTimeSeries local;      // local ARMA forecasts over the same day
  ts::ForecastErrors errors;
  ts::ForecastErrors local_errors;
  // 1 - MAE(VAR) / MAE(ARMA) over the test day; 0 when the VAR fell back.
  double improvement = 0.0;
  bool fell_back = false;
  std::size_t var_order = 0;
  std::optional<VarModel> model;
};

// `target` is the raw series Y of the ROI, `profile` its seasonal profile and
// `helpers` the de-seasonalized series of correlated ROIs, aligned with the
// target. A VAR over [D_target; helpers] is fitted on the training window and
// rolled one step at a time through day `test_day`. If the VAR cannot be
// fitted, the local ARMA forecasts are returned with fell_back set.
EnhancedForecast enhanced_forecast(const RoiTimeSeries& target, std::span<const RoiTimeSeries> helpers,
                                   const ts::SeasonalProfile& profile, std::size_t test_day,
                                   const EnhanceOptions& options = {});

}  // namespace mobagg::forecast
