#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "json.hpp"
#include "mobagg/core/series.h"
#include "mobagg/ingest/binning.h"

namespace mobagg::ingest {

// Everything needed to rebuild dense series from the sparse CSV: the shared
// epoch axis, the full ROI id list (all-zero series have no rows), and the
// grid when the ROIs are cells.
struct SeriesSidecar {
  EpochSpec epochs;
  std::vector<std::int64_t> roi_ids;
  std::optional<GridSpec> grid;
};

nlohmann::json to_json(const SeriesSidecar& sidecar);
SeriesSidecar sidecar_from_json(const nlohmann::json& j);

nlohmann::json to_json(const EpochSpec& epochs);
EpochSpec epochs_from_json(const nlohmann::json& j);
nlohmann::json to_json(const GridSpec& grid);
GridSpec grid_from_json(const nlohmann::json& j);

// CSV `roi_id,epoch_index,count`, one row per nonzero slot, values written
// in shortest round-trip form.
void write_series_csv(std::ostream& out, std::span<const RoiTimeSeries> series);
std::vector<RoiTimeSeries> read_series_csv(std::istream& in, const SeriesSidecar& sidecar);

// `<stem>.csv` plus `<stem>.json` sidecar.
void save_series(const std::filesystem::path& csv_path, std::span<const RoiTimeSeries> series,
                 const std::optional<GridSpec>& grid = std::nullopt);
std::vector<RoiTimeSeries> load_series(const std::filesystem::path& csv_path);

}  // namespace mobagg::ingest
