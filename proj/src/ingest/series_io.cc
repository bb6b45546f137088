#include "mobagg/ingest/series_io.h"

#include <fstream>
#include <string>
#include <unordered_map>

#include "mobagg/core/csv.h"
#include "mobagg/core/error.h"

namespace mobagg::ingest {

using nlohmann::json;

json to_json(const EpochSpec& epochs) {
  return json{{"start", format_iso_timestamp(epochs.start)},
              {"epoch_length_seconds", epochs.epoch_length},
              {"n_epochs", epochs.n_epochs}};
}

EpochSpec epochs_from_json(const json& j) {
  EpochSpec e;
  e.start = parse_iso_timestamp(j.at("start").get<std::string>());
  e.epoch_length = j.value("epoch_length_seconds", kSecondsPerHour);
  e.n_epochs = j.at("n_epochs").get<std::size_t>();
  e.validate();
  return e;
}

json to_json(const GridSpec& g) {
  return json{{"origin_lat", g.origin_lat}, {"origin_lon", g.origin_lon}, {"rows", g.rows},
              {"cols", g.cols},             {"cell_height", g.cell_height}, {"cell_width", g.cell_width}};
}

GridSpec grid_from_json(const json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "san_francisco") return GridSpec::san_francisco();
    throw ValidationError("unknown grid preset '" + j.get<std::string>() + "'");
  }
  GridSpec g;
  g.origin_lat = j.at("origin_lat").get<double>();
  g.origin_lon = j.at("origin_lon").get<double>();
  g.rows = j.at("rows").get<std::size_t>();
  g.cols = j.at("cols").get<std::size_t>();
  g.cell_height = j.at("cell_height").get<double>();
  g.cell_width = j.at("cell_width").get<double>();
  g.validate();
  return g;
}

json to_json(const SeriesSidecar& s) {
  json j{{"epochs", to_json(s.epochs)}, {"roi_ids", s.roi_ids}};
  if (s.grid) j["grid"] = to_json(*s.grid);
  return j;
}

SeriesSidecar sidecar_from_json(const json& j) {
  SeriesSidecar s;
  s.epochs = epochs_from_json(j.at("epochs"));
  s.roi_ids = j.at("roi_ids").get<std::vector<std::int64_t>>();
  if (j.contains("grid")) s.grid = grid_from_json(j.at("grid"));
  return s;
}

void write_series_csv(std::ostream& out, std::span<const RoiTimeSeries> series) {
  out << "roi_id,epoch_index,count\n";
  for (const auto& s : series) {
    for (std::size_t t = 0; t < s.values.size(); ++t) {
      if (s.values[t] != 0.0) out << s.roi_id << ',' << t << ',' << csv::format_double(s.values[t]) << '\n';
    }
  }
}

std::vector<RoiTimeSeries> read_series_csv(std::istream& in, const SeriesSidecar& sidecar) {
  std::vector<RoiTimeSeries> series;
  std::unordered_map<std::int64_t, std::size_t> index;
  for (const auto id : sidecar.roi_ids) {
    index.emplace(id, series.size());
    series.emplace_back(id, std::vector<double>(sidecar.epochs.n_epochs, 0.0), sidecar.epochs);
  }
  std::string line;
  if (!std::getline(in, line)) return series;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto f = csv::split_line(line);
    long long roi = 0;
    unsigned long long epoch = 0;
    double value = 0.0;
    if (f.size() != 3 || !csv::parse_int64(f[0], roi) || !csv::parse_uint64(f[1], epoch) ||
        !csv::parse_double(f[2], value)) {
      throw ParseError(line_no, "malformed series row");
    }
    const auto it = index.find(roi);
    if (it == index.end()) throw ParseError(line_no, "roi id not listed in sidecar");
    if (epoch >= sidecar.epochs.n_epochs) throw ParseError(line_no, "epoch index out of range");
    series[it->second].values[epoch] = value;
  }
  return series;
}

void save_series(const std::filesystem::path& csv_path, std::span<const RoiTimeSeries> series,
                 const std::optional<GridSpec>& grid) {
  if (series.empty()) throw ValidationError("no series to save");
  SeriesSidecar sidecar{series.front().epochs, {}, grid};
  for (const auto& s : series) sidecar.roi_ids.push_back(s.roi_id);
  std::ofstream csv_out(csv_path);
  if (!csv_out) throw ValidationError("cannot write " + csv_path.string());
  write_series_csv(csv_out, series);
  auto sidecar_path = csv_path;
  sidecar_path.replace_extension(".json");
  std::ofstream json_out(sidecar_path);
  json_out << to_json(sidecar).dump(2) << '\n';
}

std::vector<RoiTimeSeries> load_series(const std::filesystem::path& csv_path) {
  auto sidecar_path = csv_path;
  sidecar_path.replace_extension(".json");
  std::ifstream json_in(sidecar_path);
  if (!json_in) throw ValidationError("missing sidecar " + sidecar_path.string());
  const auto sidecar = sidecar_from_json(json::parse(json_in));
  std::ifstream csv_in(csv_path);
  if (!csv_in) throw ValidationError("cannot read " + csv_path.string());
  return read_series_csv(csv_in, sidecar);
}

}  // namespace mobagg::ingest
