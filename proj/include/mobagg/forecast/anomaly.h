#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "mobagg/core/series.h"
#include "mobagg/forecast/arma.h"
#include "mobagg/timeseries/seasonal.h"

namespace mobagg::forecast {

enum class Direction { kIn, kOut, kCombined };
enum class ThresholdSide { kUpper, kLower };

std::string_view to_string(Direction d);
std::string_view to_string(ThresholdSide s);

struct AnomalyEvent {
  std::int64_t roi_id = 0;
  std::size_t epoch_index = 0;
  Direction direction = Direction::kCombined;
  double residual = 0.0;  // e_t = actual - forecast
  ThresholdSide side = ThresholdSide::kUpper;
  double lambda1 = 0.0;    // mu + 3 sigma
  double lambda2 = 0.0;    // mu - 3 sigma
  double magnitude = 0.0;  // distance past the violated bound
};

struct AnomalyContext {
  std::int64_t roi_id = 0;
  Direction direction = Direction::kCombined;
  std::size_t first_epoch = 0;  // epoch index of residuals[0]
};

// One event per slot with e_t > mu + 3 sigma or e_t < mu - 3 sigma. With
// sigma = 0 every residual different from mu is flagged.
std::vector<AnomalyEvent> detect_anomalies(std::span<const double> residuals, double mu, double sigma,
                                           const AnomalyContext& context = {});

// ceil(fraction * total), robust to binary rounding of the product.
std::size_t keep_count(std::size_t total, double fraction);

// Descending by magnitude (earlier epoch, then smaller roi id, first on
// ties), truncated to keep_count(events.size(), keep_fraction).
std::vector<AnomalyEvent> rank_anomalies(std::span<const AnomalyEvent> events, double keep_fraction = 0.10);

// How the scan's ARMA coefficients evolve over the test weeks. The order
// chosen on the training week is kept; kSliding refits each test day on the
// trailing training-length window, kExpanding on all history so far.
enum class ScanRefit { kNone, kSliding, kExpanding };

struct ScanOptions {
  std::size_t train_weeks = 1;
  std::optional<ArmaOrder> order;
  std::size_t p_max = 5;
  std::size_t q_max = 5;
  // A flagged observation enters the forecast history winsorized to the
  // violated threshold, so a single spike is not echoed into the next slots
  // through the AR and MA terms at full size.
  bool clip_flagged = true;
  ScanRefit refit = ScanRefit::kExpanding;
};

struct AnomalyScan {
  ArmaModel model;
  double mu = 0.0;
  double sigma = 0.0;
  std::size_t first_test_epoch = 0;
  std::vector<double> residuals;  // one per test epoch
  std::vector<AnomalyEvent> events;
};

// Fits ARMA on the de-seasonalized training weeks and freezes mu and sigma
// from its one-step training errors. The remaining weeks are then walked one
// slot at a time (refitting daily per options.refit) and 3-sigma violations
// of the one-step errors are flagged.
AnomalyScan scan_anomalies(const RoiTimeSeries& series, const ts::SeasonalProfile& profile,
                           const ScanOptions& options = {}, Direction direction = Direction::kCombined);

}  // namespace mobagg::forecast
