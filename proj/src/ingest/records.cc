#include "mobagg/ingest/records.h"

#include <algorithm>

#include "mobagg/core/csv.h"

namespace mobagg::ingest {
namespace {

class RowSink {
 public:
  explicit RowSink(ParseMode mode) : mode_(mode) {}

  template <class Record>
  void fail(ParseResult<Record>& result, std::size_t line, std::string message) {
    if (mode_ == ParseMode::kStrict) throw ParseError(line, message);
    result.errors.push_back({line, std::move(message)});
  }

 private:
  ParseMode mode_;
};

std::size_t column_index(const std::vector<std::string>& header, const std::string& name) {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw ValidationError("missing column '" + name + "' in header");
  return static_cast<std::size_t>(it - header.begin());
}

bool blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

}  // namespace

ParseResult<TripRecord> parse_trips(std::istream& source, const TripParseOptions& options) {
  ParseResult<TripRecord> result;
  RowSink sink(options.mode);
  std::string line;
  if (!std::getline(source, line)) return result;
  const auto header = csv::split_line(line);
  const auto& s = options.schema;
  const std::size_t c_card = column_index(header, s.card_id);
  const std::size_t c_start = column_index(header, s.start_time);
  const std::size_t c_from = column_index(header, s.start_station);
  const std::size_t c_end = column_index(header, s.end_time);
  const std::size_t c_to = column_index(header, s.end_station);
  const std::optional<std::size_t> c_mode =
      s.mode.empty() ? std::nullopt : std::optional<std::size_t>(column_index(header, s.mode));
  const std::size_t needed =
      std::max({c_card, c_start, c_from, c_end, c_to, c_mode.value_or(0)}) + 1;

  std::size_t line_no = 1;
  while (std::getline(source, line)) {
    ++line_no;
    if (blank(line)) continue;
    const auto fields = csv::split_line(line);
    if (fields.size() < needed) {
      sink.fail(result, line_no, "expected at least " + std::to_string(needed) + " fields");
      continue;
    }
    TripRecord trip;
    trip.card_id = fields[c_card];
    if (trip.card_id.empty()) {
      sink.fail(result, line_no, "empty card id");
      continue;
    }
    try {
      trip.start_time = parse_iso_timestamp(fields[c_start]);
      trip.end_time = parse_iso_timestamp(fields[c_end]);
    } catch (const ValidationError& e) {
      sink.fail(result, line_no, e.what());
      continue;
    }
    unsigned long long from = 0;
    unsigned long long to = 0;
    if (!csv::parse_uint64(fields[c_from], from) || !csv::parse_uint64(fields[c_to], to) ||
        from > UINT32_MAX || to > UINT32_MAX) {
      sink.fail(result, line_no, "malformed station id");
      continue;
    }
    trip.start_station = static_cast<StationId>(from);
    trip.end_station = static_cast<StationId>(to);
    if (options.n_stations && (from >= *options.n_stations || to >= *options.n_stations)) {
      sink.fail(result, line_no, "station id out of range");
      continue;
    }
    if (trip.end_time < trip.start_time) {
      sink.fail(result, line_no, "inverted interval");
      continue;
    }
    if (c_mode) {
      trip.mode = fields[*c_mode];
      const auto& ex = options.exclude_modes;
      if (std::find(ex.begin(), ex.end(), trip.mode) != ex.end()) {
        ++result.excluded;
        continue;
      }
    }
    result.records.push_back(std::move(trip));
  }
  return result;
}

ParseResult<GpsPoint> parse_gps(std::istream& source, ParseMode mode) {
  ParseResult<GpsPoint> result;
  RowSink sink(mode);
  std::string line;
  if (!std::getline(source, line)) return result;
  const auto header = csv::split_line(line);
  const std::size_t c_cab = column_index(header, "cab_id");
  const std::size_t c_lat = column_index(header, "lat");
  const std::size_t c_lon = column_index(header, "lon");
  const std::size_t c_time = column_index(header, "unix_time");
  const std::size_t needed = std::max({c_cab, c_lat, c_lon, c_time}) + 1;

  std::size_t line_no = 1;
  while (std::getline(source, line)) {
    ++line_no;
    if (blank(line)) continue;
    const auto fields = csv::split_line(line);
    if (fields.size() < needed) {
      sink.fail(result, line_no, "expected at least " + std::to_string(needed) + " fields");
      continue;
    }
    GpsPoint p;
    p.cab_id = fields[c_cab];
    long long t = 0;
    if (p.cab_id.empty() || !csv::parse_double(fields[c_lat], p.latitude) ||
        !csv::parse_double(fields[c_lon], p.longitude) || !csv::parse_int64(fields[c_time], t)) {
      sink.fail(result, line_no, "malformed field");
      continue;
    }
    if (!(p.latitude >= -90.0 && p.latitude <= 90.0)) {
      sink.fail(result, line_no, "latitude out of range");
      continue;
    }
    if (!(p.longitude >= -180.0 && p.longitude <= 180.0)) {
      sink.fail(result, line_no, "longitude out of range");
      continue;
    }
    p.timestamp = t;
    result.records.push_back(std::move(p));
  }
  return result;
}

void write_trips(std::ostream& out, std::span<const TripRecord> trips) {
  const bool with_mode = std::any_of(trips.begin(), trips.end(), [](const auto& t) { return !t.mode.empty(); });
  out << "card_id,start_time,start_station,end_time,end_station" << (with_mode ? ",mode" : "") << '\n';
  for (const auto& t : trips) {
    out << csv::quote(t.card_id) << ',' << format_iso_timestamp(t.start_time) << ',' << t.start_station << ','
        << format_iso_timestamp(t.end_time) << ',' << t.end_station;
    if (with_mode) out << ',' << csv::quote(t.mode);
    out << '\n';
  }
}

void write_gps(std::ostream& out, std::span<const GpsPoint> points) {
  out << "cab_id,lat,lon,unix_time\n";
  for (const auto& p : points) {
    out << csv::quote(p.cab_id) << ',' << csv::format_double(p.latitude) << ','
        << csv::format_double(p.longitude) << ','
        << p.timestamp << '\n';
  }
}

}  // namespace mobagg::ingest
