#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mobagg/core/epoch.h"
#include "mobagg/core/error.h"

namespace mobagg::ingest {

using StationId = std::uint32_t;

struct TripRecord {
  std::string card_id;
  Seconds start_time = 0;
  StationId start_station = 0;
  Seconds end_time = 0;
  StationId end_station = 0;
  // Transport mode when the source carries one (e.g. "LUL", "TRAM"); empty otherwise.
  std::string mode;

  friend bool operator==(const TripRecord&, const TripRecord&) = default;
};

struct GpsPoint {
  std::string cab_id;
  double latitude = 0.0;
  double longitude = 0.0;
  std::int64_t timestamp = 0;  // Unix seconds

  friend bool operator==(const GpsPoint&, const GpsPoint&) = default;
};

enum class ParseMode { kLenient, kStrict };

struct RowError {
  std::size_t line = 0;  // 1-based, header is line 1
  std::string message;
};

// Thrown by strict-mode parsers on the first malformed row.
class ParseError : public ValidationError {
 public:
  ParseError(std::size_t line, const std::string& message)
      : ValidationError("line " + std::to_string(line) + ": " + message), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

template <class Record>
struct ParseResult {
  std::vector<Record> records;
  std::vector<RowError> errors;
  std::size_t excluded = 0;  // rows dropped by an exclude list, not errors
};

// Column names looked up in the header row. An empty mode column means the
// source has no mode field.
struct TripSchema {
  std::string card_id = "card_id";
  std::string start_time = "start_time";
  std::string start_station = "start_station";
  std::string end_time = "end_time";
  std::string end_station = "end_station";
  std::string mode;
};

struct TripParseOptions {
  TripSchema schema;
  ParseMode mode = ParseMode::kLenient;
  // When set, station ids must lie in [0, n_stations).
  std::optional<std::size_t> n_stations;
  // Rows whose mode column matches any entry are skipped and counted.
  std::vector<std::string> exclude_modes;
};

ParseResult<TripRecord> parse_trips(std::istream& source, const TripParseOptions& options = {});

ParseResult<GpsPoint> parse_gps(std::istream& source, ParseMode mode = ParseMode::kLenient);

// Writers emit the same header the parsers expect; output re-parses to equal records.
void write_trips(std::ostream& out, std::span<const TripRecord> trips);
void write_gps(std::ostream& out, std::span<const GpsPoint> points);

}  // namespace mobagg::ingest
