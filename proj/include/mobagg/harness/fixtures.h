#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "mobagg/core/epoch.h"
#include "mobagg/core/series.h"

namespace mobagg::harness {

// Monday 2010-03-01T00:00, the first epoch of every synthetic fixture.
Seconds fixture_start();

using WeeklyShape = std::array<std::array<double, kHoursPerDay>, kDaysPerWeek>;

// Commuter-style weekly pattern: sharp weekday rush-hour peaks, flatter
// weekends. `scale` multiplies every entry; `jitter` (relative) perturbs
// each slot so different ROIs get different shapes.
WeeklyShape commuter_shape(double scale, double jitter, std::mt19937_64& rng);

struct SeasonalArOptions {
  std::size_t weeks = 4;
  double phi = 0.6;
  double innovation_sd = 10.0;
  double scale = 1.0;
  double base_level = 60.0;  // added to every slot so counts stay clear of zero
  double jitter = 0.1;
  bool round_counts = true;  // integer, non-negative counts as ingested data would be
};

struct SeasonalArFixture {
  RoiTimeSeries series;
  WeeklyShape shape;
  std::vector<double> noise;  // the AR(1) component
};

// Y_t = shape[slot(t)] + N_t with N_t = phi N_{t-1} + eps_t, eps ~ N(0, sd^2).
SeasonalArFixture seasonal_ar_fixture(std::uint64_t seed, const SeasonalArOptions& options = {},
                                      std::int64_t roi_id = 0);

// Adds `magnitude` at `count` distinct epochs drawn uniformly from
// [first, last). Returns the chosen epochs in ascending order.
std::vector<std::size_t> inject_spikes(RoiTimeSeries& series, std::size_t first, std::size_t last, std::size_t count,
                                       double magnitude, std::mt19937_64& rng);

struct LeadLagOptions {
  std::size_t weeks = 4;
  double helper_phi = 0.5;
  double helper_sd = 10.0;
  double coupling = 0.8;  // D_target[t] = coupling * D_helper[t - 1] + target noise
  double target_sd = 5.0;
  // Surges on the helper during anomaly days, echoed by the target one epoch later.
  std::size_t surges_per_day = 6;
  double surge_size = 80.0;
};

struct LeadLagFixture {
  RoiTimeSeries target;  // raw Y of the target ROI
  RoiTimeSeries helper;  // raw Y of the helper ROI
  std::vector<std::size_t> anomaly_days;
};

// Target and helper share commuter-style seasonality. The helper's residual
// leads the target's by one epoch; anomaly days add surges to the helper
// that reach the target an hour later.
LeadLagFixture lead_lag_fixture(std::uint64_t seed, std::span<const std::size_t> anomaly_days,
                                const LeadLagOptions& options = {});

}  // namespace mobagg::harness
