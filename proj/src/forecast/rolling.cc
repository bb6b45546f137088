#include "mobagg/forecast/rolling.h"

#include <cmath>

#include "mobagg/core/error.h"

namespace mobagg::forecast {

ArmaModel fit_window(std::span<const double> window, const RollingOptions& options) {
  const ArmaOrder order = options.order ? *options.order : select_order(window, options.p_max, options.q_max);
  ArmaFitOptions fit_options;
  if (!options.order) fit_options.condition_on = options.p_max;
  return fit_arma(window, order.p, order.q, fit_options);
}

RollingForecast rolling_forecast(const RoiTimeSeries& series, const ts::SeasonalProfile& profile,
                                 std::size_t test_day, const RollingOptions& options) {
  if (!series.epochs.hourly()) throw ValidationError("rolling forecasts need hourly epochs");
  if (options.train_days < 1 || test_day < options.train_days) {
    throw ValidationError("test day must be preceded by the training window");
  }
  const std::size_t first = test_day * kHoursPerDay;
  if (first + kHoursPerDay > series.size()) throw ValidationError("test day beyond the end of the series");

  const RoiTimeSeries working = options.deseasonalize ? ts::deseasonalize(series, profile) : series;
  const std::size_t train_begin = first - options.train_days * kHoursPerDay;
  const std::span<const double> window(working.values.data() + train_begin, first - train_begin);

  RollingForecast out;
  out.actual = series.slice(first, kHoursPerDay);
  out.predicted = out.actual;
  out.predicted.role = SeriesRole::kForecast;
  out.fallback.assign(kHoursPerDay, false);

  try {
    out.model = fit_window(window, options);
  } catch (const std::exception&) {
    out.model.reset();
  }

  std::optional<ArmaStepper> stepper;
  if (out.model) stepper.emplace(*out.model, window);
  for (std::size_t s = 0; s < kHoursPerDay; ++s) {
    const std::size_t t = first + s;
    double d_hat = 0.0;
    if (stepper) {
      d_hat = stepper->predict();
      if (!std::isfinite(d_hat)) {
        d_hat = 0.0;
        out.fallback[s] = true;
      }
      stepper->observe(working.values[t]);
    } else {
      out.fallback[s] = true;
    }
    out.predicted.values[s] =
        options.deseasonalize ? ts::reseasonalize(d_hat, profile, series.epochs.slot(t)) : d_hat;
  }
  out.errors = ts::forecast_errors(out.actual.values, out.predicted.values);
  return out;
}

}  // namespace mobagg::forecast
