#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mobagg/core/epoch.h"

namespace mobagg {

// What a series holds: raw counts (Y), a de-seasonalized residual (D), or
// forecasts (Y hat).
enum class SeriesRole { kRaw, kDeseasonalized, kForecast };

struct RoiTimeSeries {
  std::int64_t roi_id = 0;
  std::vector<double> values;
  EpochSpec epochs;
  SeriesRole role = SeriesRole::kRaw;

  RoiTimeSeries() = default;
  RoiTimeSeries(std::int64_t id, std::vector<double> v, EpochSpec e, SeriesRole r = SeriesRole::kRaw);

  std::size_t size() const { return values.size(); }
  std::span<const double> view() const { return values; }

  // Sub-series [first, first + count) with its EpochSpec shifted to match.
  RoiTimeSeries slice(std::size_t first, std::size_t count) const;
};

// Elementwise sum of two aligned series (e.g. Y_in + Y_out).
RoiTimeSeries operator+(const RoiTimeSeries& a, const RoiTimeSeries& b);

}  // namespace mobagg
