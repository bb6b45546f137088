#pragma once

#include <array>
#include <cstddef>

#include "json.hpp"
#include "mobagg/core/epoch.h"
#include "mobagg/core/series.h"

namespace mobagg::ts {

// Mean value per (weekday, hour-of-day) slot over the weeks of a series.
struct SeasonalProfile {
  std::array<std::array<double, kHoursPerDay>, kDaysPerWeek> means{};
  std::size_t weeks_used = 0;
  // Offset of epoch starts within the hour; series must share it to use the profile.
  Seconds phase = 0;

  double at(Slot slot) const {
    return means[static_cast<std::size_t>(slot.weekday)][static_cast<std::size_t>(slot.hour)];
  }
};

// Requires hourly epochs and a length that is a whole number of weeks (>= 1).
// Throws ValidationError("profile requires aligned weeks") otherwise.
SeasonalProfile seasonal_profile(const RoiTimeSeries& series);

struct TruncatedProfile {
  SeasonalProfile profile;
  std::size_t dropped_epochs = 0;  // trailing partial week, nonzero means a warning
};

// As seasonal_profile, but drops a trailing partial week instead of failing.
TruncatedProfile seasonal_profile_truncating(const RoiTimeSeries& series);

// D[t] = Y[t] - mean[slot(t)]. The result has role kDeseasonalized.
RoiTimeSeries deseasonalize(const RoiTimeSeries& series, const SeasonalProfile& profile);

// Inverse of deseasonalize over a whole series.
RoiTimeSeries add_seasonality(const RoiTimeSeries& residual, const SeasonalProfile& profile);

inline double reseasonalize(double d_forecast, const SeasonalProfile& profile, Slot slot) {
  return d_forecast + profile.at(slot);
}

// {"Mon": [24 means], ..., "Sun": [...], "weeks_used": w, "phase_seconds": s}
nlohmann::json to_json(const SeasonalProfile& profile);
SeasonalProfile profile_from_json(const nlohmann::json& j);

}  // namespace mobagg::ts
