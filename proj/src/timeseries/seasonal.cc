#include "mobagg/timeseries/seasonal.h"

#include <string>

#include "mobagg/core/error.h"

namespace mobagg::ts {
namespace {

Seconds phase_of(const EpochSpec& e) {
  Seconds p = e.start % kSecondsPerHour;
  return p < 0 ? p + kSecondsPerHour : p;
}

void check_alignment(const RoiTimeSeries& series, const SeasonalProfile& profile) {
  if (!series.epochs.hourly() || phase_of(series.epochs) != profile.phase) {
    throw ValidationError("series epoch alignment does not match the profile");
  }
}

SeasonalProfile profile_over(const RoiTimeSeries& series, std::size_t weeks) {
  SeasonalProfile profile;
  profile.weeks_used = weeks;
  profile.phase = phase_of(series.epochs);
  const std::size_t n = weeks * kHoursPerWeek;
  for (std::size_t t = 0; t < n; ++t) {
    const Slot s = series.epochs.slot(t);
    profile.means[static_cast<std::size_t>(s.weekday)][static_cast<std::size_t>(s.hour)] += series.values[t];
  }
  for (auto& day : profile.means) {
    for (auto& m : day) m /= static_cast<double>(weeks);
  }
  return profile;
}

}  // namespace

SeasonalProfile seasonal_profile(const RoiTimeSeries& series) {
  const std::size_t n = series.values.size();
  if (!series.epochs.hourly() || n == 0 || n % kHoursPerWeek != 0) {
    throw ValidationError("profile requires aligned weeks");
  }
  return profile_over(series, n / kHoursPerWeek);
}

TruncatedProfile seasonal_profile_truncating(const RoiTimeSeries& series) {
  const std::size_t n = series.values.size();
  if (!series.epochs.hourly() || n < kHoursPerWeek) {
    throw ValidationError("profile requires aligned weeks");
  }
  return {profile_over(series, n / kHoursPerWeek), n % kHoursPerWeek};
}

RoiTimeSeries deseasonalize(const RoiTimeSeries& series, const SeasonalProfile& profile) {
  check_alignment(series, profile);
  std::vector<double> d(series.values.size());
  for (std::size_t t = 0; t < d.size(); ++t) d[t] = series.values[t] - profile.at(series.epochs.slot(t));
  return RoiTimeSeries(series.roi_id, std::move(d), series.epochs, SeriesRole::kDeseasonalized);
}

RoiTimeSeries add_seasonality(const RoiTimeSeries& residual, const SeasonalProfile& profile) {
  check_alignment(residual, profile);
  std::vector<double> y(residual.values.size());
  for (std::size_t t = 0; t < y.size(); ++t) y[t] = reseasonalize(residual.values[t], profile, residual.epochs.slot(t));
  return RoiTimeSeries(residual.roi_id, std::move(y), residual.epochs, SeriesRole::kRaw);
}

nlohmann::json to_json(const SeasonalProfile& profile) {
  nlohmann::json j = nlohmann::json::object();
  for (int d = 0; d < 7; ++d) {
    j[std::string(weekday_name(d))] = profile.means[static_cast<std::size_t>(d)];
  }
  j["weeks_used"] = profile.weeks_used;
  j["phase_seconds"] = profile.phase;
  return j;
}

SeasonalProfile profile_from_json(const nlohmann::json& j) {
  SeasonalProfile p;
  for (int d = 0; d < 7; ++d) {
    const auto row = j.at(std::string(weekday_name(d))).get<std::vector<double>>();
    if (row.size() != kHoursPerDay) throw ValidationError("profile row must have 24 entries");
    std::copy(row.begin(), row.end(), p.means[static_cast<std::size_t>(d)].begin());
  }
  p.weeks_used = j.value("weeks_used", std::size_t{0});
  p.phase = j.value("phase_seconds", Seconds{0});
  return p;
}

}  // namespace mobagg::ts
