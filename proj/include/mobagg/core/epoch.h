#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace mobagg {

// Naive civil seconds since 1970-01-01T00:00. Timestamps carry no zone;
// all weekday/hour arithmetic is done on the wall-clock value.
using Seconds = std::int64_t;

inline constexpr Seconds kSecondsPerHour = 3600;
inline constexpr Seconds kSecondsPerDay = 24 * kSecondsPerHour;
inline constexpr std::size_t kHoursPerDay = 24;
inline constexpr std::size_t kDaysPerWeek = 7;
inline constexpr std::size_t kHoursPerWeek = kHoursPerDay * kDaysPerWeek;

// Parses "YYYY-MM-DDTHH:MM" with optional ":SS". A space may replace 'T'.
// Throws ValidationError on malformed input.
Seconds parse_iso_timestamp(std::string_view text);

// Formats as "YYYY-MM-DDTHH:MM", appending ":SS" only when nonzero.
std::string format_iso_timestamp(Seconds t);

// (weekday, hour-of-day) of a timestamp. Monday is 0.
struct Slot {
  int weekday = 0;
  int hour = 0;
  friend bool operator==(const Slot&, const Slot&) = default;
};

Slot slot_of(Seconds t);

std::string_view weekday_name(int weekday);

struct EpochSpec {
  Seconds start = 0;
  Seconds epoch_length = kSecondsPerHour;
  std::size_t n_epochs = 1;

  void validate() const;

  // Index of the epoch containing t, or nullopt when t falls outside.
  std::optional<std::size_t> index_of(Seconds t) const;

  Seconds epoch_start(std::size_t index) const {
    return start + static_cast<Seconds>(index) * epoch_length;
  }

  Slot slot(std::size_t index) const { return slot_of(epoch_start(index)); }

  bool hourly() const { return epoch_length == kSecondsPerHour; }

  friend bool operator==(const EpochSpec&, const EpochSpec&) = default;
};

}  // namespace mobagg
