#include "mobagg/core/epoch.h"

#include <array>
#include <charconv>
#include <chrono>
#include <cstdio>

#include "mobagg/core/error.h"

namespace mobagg {
namespace {

int parse_fixed(std::string_view text, std::size_t pos, std::size_t width) {
  if (pos + width > text.size()) {
    throw ValidationError("timestamp too short: '" + std::string(text) + "'");
  }
  int value = 0;
  auto first = text.data() + pos;
  auto [ptr, ec] = std::from_chars(first, first + width, value);
  if (ec != std::errc() || ptr != first + width) {
    throw ValidationError("malformed timestamp: '" + std::string(text) + "'");
  }
  return value;
}

void expect_char(std::string_view text, std::size_t pos, std::string_view allowed) {
  if (pos >= text.size() || allowed.find(text[pos]) == std::string_view::npos) {
    throw ValidationError("malformed timestamp: '" + std::string(text) + "'");
  }
}

// Floor division for negative timestamps.
Seconds floor_div(Seconds a, Seconds b) {
  Seconds q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

Seconds parse_iso_timestamp(std::string_view text) {
  using namespace std::chrono;
  const int y = parse_fixed(text, 0, 4);
  expect_char(text, 4, "-");
  const int mo = parse_fixed(text, 5, 2);
  expect_char(text, 7, "-");
  const int d = parse_fixed(text, 8, 2);
  expect_char(text, 10, "T ");
  const int hh = parse_fixed(text, 11, 2);
  expect_char(text, 13, ":");
  const int mm = parse_fixed(text, 14, 2);
  int ss = 0;
  if (text.size() > 16) {
    expect_char(text, 16, ":");
    ss = parse_fixed(text, 17, 2);
    if (text.size() != 19) {
      throw ValidationError("trailing characters in timestamp: '" + std::string(text) + "'");
    }
  }
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || hh > 23 || mm > 59 || ss > 59) {
    throw ValidationError("timestamp out of range: '" + std::string(text) + "'");
  }
  const auto days = sys_days{ymd}.time_since_epoch().count();
  return static_cast<Seconds>(days) * kSecondsPerDay + hh * 3600 + mm * 60 + ss;
}

std::string format_iso_timestamp(Seconds t) {
  using namespace std::chrono;
  const Seconds days = floor_div(t, kSecondsPerDay);
  const Seconds rem = t - days * kSecondsPerDay;
  const year_month_day ymd{sys_days{std::chrono::days{days}}};
  std::array<char, 32> buf{};
  const int hh = static_cast<int>(rem / 3600);
  const int mm = static_cast<int>((rem % 3600) / 60);
  const int ss = static_cast<int>(rem % 60);
  int n;
  if (ss != 0) {
    n = std::snprintf(buf.data(), buf.size(), "%04d-%02u-%02uT%02d:%02d:%02d", static_cast<int>(ymd.year()),
                      static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), hh, mm, ss);
  } else {
    n = std::snprintf(buf.data(), buf.size(), "%04d-%02u-%02uT%02d:%02d", static_cast<int>(ymd.year()),
                      static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), hh, mm);
  }
  return std::string(buf.data(), static_cast<std::size_t>(n));
}

Slot slot_of(Seconds t) {
  const Seconds days = floor_div(t, kSecondsPerDay);
  // 1970-01-01 was a Thursday (index 3 with Monday = 0).
  Seconds wd = (days + 3) % 7;
  if (wd < 0) wd += 7;
  const Seconds rem = t - days * kSecondsPerDay;
  return Slot{static_cast<int>(wd), static_cast<int>(rem / kSecondsPerHour)};
}

std::string_view weekday_name(int weekday) {
  static constexpr std::array<std::string_view, 7> kNames{"Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"};
  if (weekday < 0 || weekday >= 7) throw ValidationError("weekday out of range");
  return kNames[static_cast<std::size_t>(weekday)];
}

void EpochSpec::validate() const {
  if (epoch_length <= 0) throw ValidationError("epoch_length must be positive");
  if (n_epochs < 1) throw ValidationError("n_epochs must be at least 1");
}

std::optional<std::size_t> EpochSpec::index_of(Seconds t) const {
  if (t < start) return std::nullopt;
  const auto idx = static_cast<std::size_t>((t - start) / epoch_length);
  if (idx >= n_epochs) return std::nullopt;
  return idx;
}

}  // namespace mobagg
