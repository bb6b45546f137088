#include "mobagg/ingest/binning.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>
#include <unordered_map>

namespace mobagg::ingest {

void GridSpec::validate() const {
  if (rows < 1 || cols < 1) throw ValidationError("grid needs at least one row and column");
  if (!(cell_height > 0.0) || !(cell_width > 0.0)) throw ValidationError("grid cell dimensions must be positive");
}

GridSpec GridSpec::san_francisco() {
  GridSpec g;
  g.origin_lat = 37.60;
  g.origin_lon = -122.52;
  g.rows = 100;
  g.cols = 100;
  g.cell_height = 0.14 / 69.05;
  g.cell_width = 0.19 / 54.72;
  return g;
}

std::optional<std::size_t> cell_of(const GpsPoint& point, const GridSpec& grid) {
  const double r = std::floor((point.latitude - grid.origin_lat) / grid.cell_height);
  const double c = std::floor((point.longitude - grid.origin_lon) / grid.cell_width);
  if (!(r >= 0.0) || !(c >= 0.0)) return std::nullopt;
  if (r >= static_cast<double>(grid.rows) || c >= static_cast<double>(grid.cols)) return std::nullopt;
  return static_cast<std::size_t>(r) * grid.cols + static_cast<std::size_t>(c);
}

std::vector<RoiTimeSeries> StationSeries::combined() const {
  std::vector<RoiTimeSeries> sum;
  sum.reserve(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) sum.push_back(in[i] + out[i]);
  return sum;
}

StationSeries station_series(std::span<const TripRecord> trips, const EpochSpec& epochs, std::size_t n_stations) {
  epochs.validate();
  StationSeries s;
  s.in.reserve(n_stations);
  s.out.reserve(n_stations);
  for (std::size_t i = 0; i < n_stations; ++i) {
    s.in.emplace_back(static_cast<std::int64_t>(i), std::vector<double>(epochs.n_epochs, 0.0), epochs);
    s.out.emplace_back(static_cast<std::int64_t>(i), std::vector<double>(epochs.n_epochs, 0.0), epochs);
  }
  for (const auto& trip : trips) {
    const auto t_in = epochs.index_of(trip.start_time);
    if (t_in && trip.start_station < n_stations) {
      s.in[trip.start_station].values[*t_in] += 1.0;
    } else {
      ++s.dropped_events;
    }
    const auto t_out = epochs.index_of(trip.end_time);
    if (t_out && trip.end_station < n_stations) {
      s.out[trip.end_station].values[*t_out] += 1.0;
    } else {
      ++s.dropped_events;
    }
  }
  return s;
}

std::vector<RoiTimeSeries> grid_series(std::span<const GpsPoint> points, const GridSpec& grid,
                                       const EpochSpec& epochs) {
  grid.validate();
  epochs.validate();
  std::unordered_map<std::string, std::size_t> cab_index;
  std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> presence;  // (cell, epoch, cab)
  presence.reserve(points.size());
  for (const auto& p : points) {
    const auto cell = cell_of(p, grid);
    const auto epoch = epochs.index_of(p.timestamp);
    if (!cell || !epoch) continue;
    const auto [it, inserted] = cab_index.try_emplace(p.cab_id, cab_index.size());
    presence.emplace_back(*cell, *epoch, it->second);
  }
  std::sort(presence.begin(), presence.end());
  presence.erase(std::unique(presence.begin(), presence.end()), presence.end());

  std::vector<RoiTimeSeries> series;
  series.reserve(grid.cell_count());
  for (std::size_t c = 0; c < grid.cell_count(); ++c) {
    series.emplace_back(static_cast<std::int64_t>(c), std::vector<double>(epochs.n_epochs, 0.0), epochs);
  }
  for (const auto& [cell, epoch, cab] : presence) series[cell].values[epoch] += 1.0;
  return series;
}

}  // namespace mobagg::ingest
