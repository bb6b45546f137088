#include "mobagg/forecast/anomaly.h"

#include <algorithm>
#include <cmath>
#include <optional>

#include "mobagg/core/error.h"
#include "mobagg/forecast/rolling.h"
#include "mobagg/timeseries/errors.h"

namespace mobagg::forecast {

std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::kIn:
      return "in";
    case Direction::kOut:
      return "out";
    case Direction::kCombined:
      return "combined";
  }
  return "combined";
}

std::string_view to_string(ThresholdSide s) { return s == ThresholdSide::kUpper ? "upper" : "lower"; }

std::vector<AnomalyEvent> detect_anomalies(std::span<const double> residuals, double mu, double sigma,
                                           const AnomalyContext& context) {
  if (!(sigma >= 0.0)) throw ValidationError("sigma must be non-negative");
  const double lambda1 = mu + 3.0 * sigma;
  const double lambda2 = mu - 3.0 * sigma;
  std::vector<AnomalyEvent> events;
  for (std::size_t t = 0; t < residuals.size(); ++t) {
    const double e = residuals[t];
    if (!(e > lambda1) && !(e < lambda2)) continue;
    AnomalyEvent ev;
    ev.roi_id = context.roi_id;
    ev.epoch_index = context.first_epoch + t;
    ev.direction = context.direction;
    ev.residual = e;
    ev.lambda1 = lambda1;
    ev.lambda2 = lambda2;
    ev.side = e > lambda1 ? ThresholdSide::kUpper : ThresholdSide::kLower;
    ev.magnitude = ev.side == ThresholdSide::kUpper ? e - lambda1 : lambda2 - e;
    events.push_back(ev);
  }
  return events;
}

std::size_t keep_count(std::size_t total, double fraction) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw ValidationError("keep fraction must be in [0, 1]");
  const double x = fraction * static_cast<double>(total);
  return std::min(total, static_cast<std::size_t>(std::ceil(x - 1e-9 * std::max(1.0, x))));
}

std::vector<AnomalyEvent> rank_anomalies(std::span<const AnomalyEvent> events, double keep_fraction) {
  std::vector<AnomalyEvent> sorted(events.begin(), events.end());
  std::stable_sort(sorted.begin(), sorted.end(), [](const AnomalyEvent& a, const AnomalyEvent& b) {
    if (a.magnitude != b.magnitude) return a.magnitude > b.magnitude;
    if (a.epoch_index != b.epoch_index) return a.epoch_index < b.epoch_index;
    return a.roi_id < b.roi_id;
  });
  sorted.resize(keep_count(sorted.size(), keep_fraction));
  return sorted;
}

AnomalyScan scan_anomalies(const RoiTimeSeries& series, const ts::SeasonalProfile& profile,
                           const ScanOptions& options, Direction direction) {
  const std::size_t train = options.train_weeks * kHoursPerWeek;
  if (options.train_weeks < 1 || train >= series.size()) {
    throw ValidationError("anomaly scan needs training weeks followed by test data");
  }
  const auto d = ts::deseasonalize(series, profile);
  const std::span<const double> window(d.values.data(), train);

  RollingOptions fit_options;
  fit_options.order = options.order;
  fit_options.p_max = options.p_max;
  fit_options.q_max = options.q_max;

  AnomalyScan scan;
  scan.model = fit_window(window, fit_options);
  const std::span<const double> training_errors(scan.model.residuals.data() + scan.model.conditioning,
                                                scan.model.residuals.size() - scan.model.conditioning);
  const auto stats = ts::summarize(training_errors);
  scan.mu = stats.mean;
  scan.sigma = stats.stddev;
  scan.first_test_epoch = train;

  const double lambda1 = scan.mu + 3.0 * scan.sigma;
  const double lambda2 = scan.mu - 3.0 * scan.sigma;
  // History as the detector saw it: flagged observations winsorized.
  std::vector<double> cleaned(d.values.begin(), d.values.begin() + static_cast<std::ptrdiff_t>(train));
  ArmaModel model = scan.model;
  std::optional<ArmaStepper> stepper(std::in_place, model, cleaned);
  for (std::size_t t = train; t < d.size(); ++t) {
    if (options.refit != ScanRefit::kNone && t > train && (t - train) % kHoursPerDay == 0) {
      const std::size_t begin = options.refit == ScanRefit::kSliding ? cleaned.size() - train : 0;
      const std::span<const double> window(cleaned.data() + begin, cleaned.size() - begin);
      try {
        model = fit_arma(window, scan.model.p, scan.model.q);
      } catch (const ArmaFitError& e) {
        model = e.best_so_far();
      }
      stepper.emplace(model, window);
    }
    const double predicted = stepper->predict();
    const double e = d.values[t] - predicted;
    scan.residuals.push_back(e);
    double seen = d.values[t];
    if (options.clip_flagged && (e > lambda1 || e < lambda2)) seen = predicted + std::clamp(e, lambda2, lambda1);
    stepper->observe(seen);
    cleaned.push_back(seen);
  }
  scan.events = detect_anomalies(scan.residuals, scan.mu, scan.sigma, {series.roi_id, direction, train});
  return scan;
}

}  // namespace mobagg::forecast
