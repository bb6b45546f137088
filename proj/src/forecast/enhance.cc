#include "mobagg/forecast/enhance.h"

#include <algorithm>
#include <vector>

#include "mobagg/core/error.h"

namespace mobagg::forecast {

EnhancedForecast enhanced_forecast(const RoiTimeSeries& target, std::span<const RoiTimeSeries> helpers,
                                   const ts::SeasonalProfile& profile, std::size_t test_day,
                                   const EnhanceOptions& options) {
  for (const auto& h : helpers) {
    if (h.size() != target.size()) throw ValidationError("helper series are not aligned with the target");
  }
  RollingOptions local_options;
  local_options.train_days = options.train_days;
  local_options.order = options.arma_order;
  local_options.p_max = options.p_max;
  local_options.q_max = options.q_max;
  const auto local = rolling_forecast(target, profile, test_day, local_options);

  EnhancedForecast out;
  out.actual = local.actual;
  out.local = local.predicted;
  out.local_errors = local.errors;

  const std::size_t first = test_day * kHoursPerDay;
  const std::size_t train_begin = first - options.train_days * kHoursPerDay;
  const auto d_target = ts::deseasonalize(target, profile);

  std::vector<std::vector<double>> window;
  window.emplace_back(d_target.values.begin() + static_cast<std::ptrdiff_t>(train_begin),
                      d_target.values.begin() + static_cast<std::ptrdiff_t>(first));
  for (const auto& h : helpers) {
    window.emplace_back(h.values.begin() + static_cast<std::ptrdiff_t>(train_begin),
                        h.values.begin() + static_cast<std::ptrdiff_t>(first));
  }

  std::size_t order = options.var_order.value_or(
      std::clamp<std::size_t>(local.model ? local.model->p : 1, 1, options.max_var_order));
  const std::size_t k = window.size();
  // Shrink the order until the window satisfies the VAR length requirement.
  while (order > 1 && window[0].size() < 10 * (k * order + 1)) --order;
  try {
    if (k >= 2) out.model = fit_var(window, order);
  } catch (const ValidationError&) {
    out.model.reset();
  }

  if (!out.model) {
    out.fell_back = true;
    out.predicted = out.local;
    out.errors = out.local_errors;
    out.improvement = 0.0;
    return out;
  }
  out.var_order = order;

  const std::size_t depth = window[0].size() + kHoursPerDay;
  Eigen::MatrixXd history(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(depth));
  for (std::size_t j = 0; j < k; ++j) {
    const auto& source = j == 0 ? d_target.values : helpers[j - 1].values;
    for (std::size_t t = 0; t < depth; ++t) {
      history(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(t)) = source[train_begin + t];
    }
  }

  out.predicted = local.predicted;
  for (std::size_t s = 0; s < kHoursPerDay; ++s) {
    const auto observed = static_cast<Eigen::Index>(window[0].size() + s);
    const auto f = forecast_var(*out.model, history.leftCols(observed));
    const std::size_t t = first + s;
    out.predicted.values[s] = ts::reseasonalize(f(0), profile, target.epochs.slot(t));
  }
  out.errors = ts::forecast_errors(out.actual.values, out.predicted.values);
  const double local_mae = out.local_errors.mean_absolute();
  out.improvement = local_mae > 0.0 ? 1.0 - out.errors.mean_absolute() / local_mae : 0.0;
  return out;
}

}  // namespace mobagg::forecast
