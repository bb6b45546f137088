#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "mobagg/core/epoch.h"
#include "mobagg/core/series.h"
#include "mobagg/ingest/records.h"

namespace mobagg::ingest {

// A rows x cols lattice of half-open cells [lo, hi) anchored at the
// south-west corner (origin_lat, origin_lon). Row index grows northwards,
// column index eastwards; cell id = row * cols + col.
struct GridSpec {
  double origin_lat = 0.0;
  double origin_lon = 0.0;
  std::size_t rows = 100;
  std::size_t cols = 100;
  double cell_height = 0.0;  // degrees latitude
  double cell_width = 0.0;   // degrees longitude

  void validate() const;
  std::size_t cell_count() const { return rows * cols; }

  // 100x100 cells of 0.19 mi (east-west) by 0.14 mi (north-south), converted
  // to degrees at latitude 37.7 (69.05 mi per degree latitude, 54.72 mi per
  // degree longitude). Covers downtown San Francisco and the SFO corridor.
  static GridSpec san_francisco();

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

std::optional<std::size_t> cell_of(const GpsPoint& point, const GridSpec& grid);

struct StationSeries {
  std::vector<RoiTimeSeries> in;   // tap-in counts per station
  std::vector<RoiTimeSeries> out;  // tap-out counts per station
  std::size_t dropped_events = 0;  // tap events outside the epoch range or station range

  // Y = Y_in + Y_out per station.
  std::vector<RoiTimeSeries> combined() const;
};

// Each trip contributes its tap-in to the epoch of start_time and its tap-out
// to the epoch of end_time; the two events are binned independently.
StationSeries station_series(std::span<const TripRecord> trips, const EpochSpec& epochs, std::size_t n_stations);

// Presence counts: a cab contributes at most 1 to a (cell, epoch) pair no
// matter how many of its points land there. Points outside the grid or the
// epoch range are ignored. Returns one series per cell, indexed by cell id.
std::vector<RoiTimeSeries> grid_series(std::span<const GpsPoint> points, const GridSpec& grid,
                                       const EpochSpec& epochs);

}  // namespace mobagg::ingest
