#include "mobagg/harness/fixtures.h"

#include <algorithm>
#include <cmath>

#include "mobagg/core/error.h"

namespace mobagg::harness {
namespace {

constexpr std::array<double, kHoursPerDay> kWeekday = {20,  12,  8,   6,   8,   25,  80,  220, 400, 260, 140, 120,
                                                      130, 125, 130, 160, 240, 410, 300, 170, 110, 80,  55,  35};
constexpr std::array<double, kHoursPerDay> kWeekend = {30,  20,  12,  8,   6,   8,   15,  30,  55,  90,  130, 160,
                                                      170, 175, 170, 160, 150, 140, 120, 100, 80,  65,  50,  40};

EpochSpec fixture_epochs(std::size_t weeks) {
  if (weeks < 1) throw ValidationError("fixture needs at least one week");
  return EpochSpec{fixture_start(), kSecondsPerHour, weeks * kHoursPerWeek};
}

}  // namespace

Seconds fixture_start() { return parse_iso_timestamp("2010-03-01T00:00"); }

WeeklyShape commuter_shape(double scale, double jitter, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  WeeklyShape shape{};
  for (std::size_t d = 0; d < kDaysPerWeek; ++d) {
    const auto& day = d < 5 ? kWeekday : kWeekend;
    // Friday evenings run busier, Sundays quieter.
    const double day_factor = d == 4 ? 1.1 : d == 6 ? 0.85 : 1.0;
    for (std::size_t h = 0; h < kHoursPerDay; ++h) {
      shape[d][h] = scale * day[h] * day_factor * (1.0 + jitter * u(rng));
    }
  }
  return shape;
}

SeasonalArFixture seasonal_ar_fixture(std::uint64_t seed, const SeasonalArOptions& options, std::int64_t roi_id) {
  std::mt19937_64 rng(seed);
  SeasonalArFixture f;
  f.shape = commuter_shape(options.scale, options.jitter, rng);
  const EpochSpec epochs = fixture_epochs(options.weeks);
  std::normal_distribution<double> eps(0.0, options.innovation_sd);
  std::vector<double> values(epochs.n_epochs);
  double n = 0.0;
  for (std::size_t t = 0; t < epochs.n_epochs; ++t) {
    n = options.phi * n + eps(rng);
    f.noise.push_back(n);
    const Slot s = epochs.slot(t);
    double y = options.base_level + f.shape[static_cast<std::size_t>(s.weekday)][static_cast<std::size_t>(s.hour)] + n;
    if (options.round_counts) y = std::max(0.0, std::round(y));
    values[t] = y;
  }
  f.series = RoiTimeSeries(roi_id, std::move(values), epochs);
  return f;
}

std::vector<std::size_t> inject_spikes(RoiTimeSeries& series, std::size_t first, std::size_t last, std::size_t count,
                                       double magnitude, std::mt19937_64& rng) {
  if (last > series.size() || first >= last || last - first < count) {
    throw ValidationError("spike range cannot hold the requested spikes");
  }
  std::vector<std::size_t> slots(last - first);
  for (std::size_t i = 0; i < slots.size(); ++i) slots[i] = first + i;
  std::shuffle(slots.begin(), slots.end(), rng);
  slots.resize(count);
  std::sort(slots.begin(), slots.end());
  for (auto t : slots) series.values[t] += magnitude;
  return slots;
}

LeadLagFixture lead_lag_fixture(std::uint64_t seed, std::span<const std::size_t> anomaly_days,
                                const LeadLagOptions& options) {
  std::mt19937_64 rng(seed);
  const EpochSpec epochs = fixture_epochs(options.weeks);
  const std::size_t n = epochs.n_epochs;
  const WeeklyShape target_shape = commuter_shape(1.0, 0.1, rng);
  const WeeklyShape helper_shape = commuter_shape(1.0, 0.1, rng);

  std::normal_distribution<double> helper_eps(0.0, options.helper_sd);
  std::normal_distribution<double> target_eps(0.0, options.target_sd);
  std::vector<double> dh(n);
  double level = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    level = options.helper_phi * level + helper_eps(rng);
    dh[t] = level;
  }

  std::uniform_real_distribution<double> size(0.5, 1.5);
  for (auto day : anomaly_days) {
    if ((day + 1) * kHoursPerDay > n) throw ValidationError("anomaly day beyond the fixture");
    // Surges land in daytime hours; the target feels each one an hour later.
    std::vector<std::size_t> hours(17);
    for (std::size_t i = 0; i < hours.size(); ++i) hours[i] = 6 + i;
    std::shuffle(hours.begin(), hours.end(), rng);
    for (std::size_t i = 0; i < std::min(options.surges_per_day, hours.size()); ++i) {
      dh[day * kHoursPerDay + hours[i]] += options.surge_size * size(rng);
    }
  }

  std::vector<double> dt(n);
  for (std::size_t t = 0; t < n; ++t) dt[t] = (t > 0 ? options.coupling * dh[t - 1] : 0.0) + target_eps(rng);

  std::vector<double> yt(n);
  std::vector<double> yh(n);
  for (std::size_t t = 0; t < n; ++t) {
    const Slot s = epochs.slot(t);
    const auto d = static_cast<std::size_t>(s.weekday);
    const auto h = static_cast<std::size_t>(s.hour);
    yt[t] = target_shape[d][h] + dt[t];
    yh[t] = helper_shape[d][h] + dh[t];
  }
  LeadLagFixture f;
  f.target = RoiTimeSeries(0, std::move(yt), epochs);
  f.helper = RoiTimeSeries(1, std::move(yh), epochs);
  f.anomaly_days.assign(anomaly_days.begin(), anomaly_days.end());
  return f;
}

}  // namespace mobagg::harness
