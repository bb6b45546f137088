#include "mobagg/harness/pipeline.h"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <tuple>

#include "mobagg/core/csv.h"
#include "mobagg/core/error.h"
#include "mobagg/forecast/correlation.h"
#include "mobagg/timeseries/errors.h"
#include "mobagg/timeseries/seasonal.h"

namespace mobagg::harness {
namespace {

using forecast::Direction;

void check_counts(const RoiTimeSeries& s, const EpochSpec& epochs) {
  if (s.epochs != epochs) throw ValidationError("pipeline series must share one epoch axis");
  for (double v : s.values) {
    if (!(v >= 0.0) || v != std::floor(v) || v > 4294967295.0) {
      throw ValidationError("pipeline series must hold non-negative integer counts (roi " +
                            std::to_string(s.roi_id) + ")");
    }
  }
}

RoiTimeSeries empty_like(const RoiTimeSeries& s) {
  return RoiTimeSeries(s.roi_id, std::vector<double>(s.size()), s.epochs);
}

// Runs body(i) for i in [0, n) across threads and rethrows the first failure.
template <class Body>
void parallel_for(std::size_t n, Body body) {
  std::vector<std::exception_ptr> failures(n);
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      failures[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
}

ts::SeasonalProfile profile_of(const RoiTimeSeries& s) { return ts::seasonal_profile_truncating(s).profile; }

std::vector<ForecastRow> forecast_rows(const forecast::RollingForecast& f, std::size_t day) {
  std::vector<ForecastRow> rows;
  for (std::size_t i = 0; i < f.actual.size(); ++i) {
    ForecastRow r;
    r.roi_id = f.actual.roi_id;
    r.epoch = day * kHoursPerDay + i;
    r.actual = f.actual.values[i];
    r.predicted = f.predicted.values[i];
    r.abs_err = f.errors.absolute[i];
    r.pct_err = f.errors.percentage[i];
    rows.push_back(r);
  }
  return rows;
}

double mean_abs(std::span<const ForecastRow> rows) {
  if (rows.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& r : rows) sum += r.abs_err;
  return sum / static_cast<double>(rows.size());
}

struct Channel {
  const RoiTimeSeries* series;
  Direction direction;
};

}  // namespace

PipelineSource PipelineSource::stations(std::vector<RoiTimeSeries> in, std::vector<RoiTimeSeries> out) {
  PipelineSource s;
  s.layout = Layout::kStation;
  s.in = std::move(in);
  s.out = std::move(out);
  s.validate();
  return s;
}

PipelineSource PipelineSource::grid(std::vector<RoiTimeSeries> cells) {
  PipelineSource s;
  s.layout = Layout::kGrid;
  s.cells = std::move(cells);
  s.validate();
  return s;
}

const EpochSpec& PipelineSource::epochs() const {
  const auto& first = layout == Layout::kStation ? in : cells;
  if (first.empty()) throw ValidationError("pipeline source has no series");
  return first.front().epochs;
}

void PipelineSource::validate() const {
  if (layout == Layout::kStation) {
    if (in.empty() || in.size() != out.size()) {
      throw ValidationError("station data needs matching, non-empty tap-in and tap-out series");
    }
    if (!cells.empty()) throw ValidationError("station data cannot carry grid cells");
  } else if (cells.empty() || !in.empty() || !out.empty()) {
    throw ValidationError("grid data needs cell series only");
  }
  const EpochSpec& e = epochs();
  for (const auto* group : {&in, &out, &cells}) {
    for (const auto& s : *group) check_counts(s, e);
  }
  if (layout == Layout::kStation) {
    for (std::size_t i = 0; i < in.size(); ++i) {
      if (in[i].roi_id != out[i].roi_id) throw ValidationError("tap-in and tap-out series must list stations alike");
    }
  }
}

AggregateSeries collect_aggregates(const SimConfig& config, const PipelineSource& source) {
  source.validate();
  SimConfig c = config;
  const bool stations = source.layout == PipelineSource::Layout::kStation;
  std::size_t n_roi = 0;
  if (stations) {
    if (c.mode != VectorMode::kStation && c.mode != VectorMode::kSketch) {
      throw ValidationError("station data runs in station or sketch mode");
    }
    n_roi = source.in.size();
    c.n_stations = n_roi;
  } else {
    if (c.mode != VectorMode::kGrid) throw ValidationError("grid data runs in grid mode");
    n_roi = source.cells.size();
    const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n_roi))));
    if (side * side != n_roi) throw ValidationError("grid mode needs a square number of cells");
    c.grid_side = side;
  }
  c.validate();

  AggregateSeries agg;
  agg.layout_ = source.layout;
  if (stations) {
    for (const auto& s : source.in) agg.in_.push_back(empty_like(s));
    for (const auto& s : source.out) agg.out_.push_back(empty_like(s));
  } else {
    for (const auto& s : source.cells) agg.combined_.push_back(empty_like(s));
  }

  Population population(c.n_users, c.seed);
  std::seed_seq seq{c.seed, std::uint64_t{3}};
  std::mt19937_64 rng(seq);
  const std::size_t length = c.input_length();
  std::vector<std::uint32_t> target(length);
  const std::size_t m = source.epochs().n_epochs;
  for (std::size_t t = 0; t < m; ++t) {
    for (std::size_t r = 0; r < n_roi; ++r) {
      if (stations) {
        target[r] = static_cast<std::uint32_t>(source.in[r].values[t]);
        target[n_roi + r] = static_cast<std::uint32_t>(source.out[r].values[t]);
      } else {
        target[r] = static_cast<std::uint32_t>(source.cells[r].values[t]);
      }
    }
    const auto users = synthesize_users(target, c.n_users, rng);
    auto round = simulate_round(c, population, t, users);
    for (std::size_t r = 0; r < n_roi; ++r) {
      if (stations) {
        agg.in_[r].values[t] = round.decoded[r];
        agg.out_[r].values[t] = round.decoded[n_roi + r];
      } else {
        agg.combined_[r].values[t] = round.decoded[r];
      }
    }
    agg.rounds_.push_back(std::move(round.report));
  }
  if (stations) {
    for (std::size_t r = 0; r < n_roi; ++r) agg.combined_.push_back(agg.in_[r] + agg.out_[r]);
  }
  return agg;
}

PipelineReport analyze(const AggregateSeries& aggregates, const AnalysisOptions& options) {
  PipelineReport report;
  const auto& combined = aggregates.combined();
  if (combined.empty()) throw ValidationError("no aggregate series to analyze");
  const std::size_t n_days = combined.front().size() / kHoursPerDay;
  const bool stations = aggregates.layout() == PipelineSource::Layout::kStation;

  const auto selected = [&](std::int64_t roi) {
    return options.rois.empty() || std::find(options.rois.begin(), options.rois.end(), roi) != options.rois.end();
  };
  for (auto roi : options.rois) {
    if (std::none_of(combined.begin(), combined.end(), [&](const auto& s) { return s.roi_id == roi; })) {
      throw ValidationError("no aggregate series for roi " + std::to_string(roi));
    }
  }
  std::vector<std::size_t> targets;
  for (std::size_t r = 0; r < combined.size(); ++r) {
    if (selected(combined[r].roi_id)) targets.push_back(r);
  }

  std::vector<std::size_t> days = options.forecast_days;
  if (days.empty()) {
    const std::size_t first = n_days > kDaysPerWeek ? n_days - kDaysPerWeek : 0;
    for (std::size_t d = std::max(first, options.rolling.train_days); d < n_days; ++d) days.push_back(d);
  }

  // Forecasts of Y per ROI, both methods.
  std::vector<std::vector<ForecastRow>> seasonal(targets.size());
  std::vector<std::vector<ForecastRow>> baseline(targets.size());
  parallel_for(targets.size(), [&](std::size_t k) {
    const std::size_t r = targets[k];
    const auto profile = profile_of(combined[r]);
    auto with = options.rolling;
    with.deseasonalize = true;
    auto without = options.rolling;
    without.deseasonalize = false;
    for (auto day : days) {
      const auto a = forecast_rows(forecast::rolling_forecast(combined[r], profile, day, with), day);
      const auto b = forecast_rows(forecast::rolling_forecast(combined[r], profile, day, without), day);
      seasonal[k].insert(seasonal[k].end(), a.begin(), a.end());
      baseline[k].insert(baseline[k].end(), b.begin(), b.end());
    }
  });
  for (std::size_t k = 0; k < targets.size(); ++k) {
    report.forecasts.insert(report.forecasts.end(), seasonal[k].begin(), seasonal[k].end());
    report.baseline.insert(report.baseline.end(), baseline[k].begin(), baseline[k].end());
  }

  // Anomalies per direction: tap-in and tap-out for stations, presence for cells.
  std::vector<Channel> channels;
  if (stations) {
    for (const auto& s : aggregates.in()) channels.push_back({&s, Direction::kIn});
    for (const auto& s : aggregates.out()) channels.push_back({&s, Direction::kOut});
  } else {
    for (const auto& s : combined) channels.push_back({&s, Direction::kCombined});
  }
  std::vector<ts::SeasonalProfile> profiles(channels.size());
  std::vector<RoiTimeSeries> residual(channels.size());
  std::vector<std::vector<forecast::AnomalyEvent>> found(channels.size());
  parallel_for(channels.size(), [&](std::size_t i) {
    profiles[i] = profile_of(*channels[i].series);
    residual[i] = ts::deseasonalize(*channels[i].series, profiles[i]);
    if (!selected(channels[i].series->roi_id)) return;
    found[i] = forecast::scan_anomalies(*channels[i].series, profiles[i], options.scan, channels[i].direction).events;
  });
  std::vector<forecast::AnomalyEvent> all;
  for (const auto& f : found) all.insert(all.end(), f.begin(), f.end());
  report.summary.anomalies = all.size();
  report.events = forecast::rank_anomalies(all, options.keep_fraction);

  // Enhanced forecasts for the days of ranked events, helpers drawn from the
  // same direction.
  std::map<std::pair<std::int64_t, Direction>, std::size_t> channel_of;
  for (std::size_t i = 0; i < channels.size(); ++i) channel_of[{channels[i].series->roi_id, channels[i].direction}] = i;
  std::vector<std::tuple<std::size_t, std::size_t>> jobs;  // (channel, day)
  std::set<std::tuple<std::size_t, std::size_t>> seen;
  for (const auto& ev : report.events) {
    const std::size_t ch = channel_of.at({ev.roi_id, ev.direction});
    const std::size_t day = ev.epoch_index / kHoursPerDay;
    if (day < options.enhance.train_days) {
      ++report.summary.skipped_events;
      continue;
    }
    if (seen.insert({ch, day}).second) jobs.emplace_back(ch, day);
  }
  const std::size_t top_k = options.top_k.value_or(stations ? 10 : 5);
  report.enhancements.resize(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t j) {
    const auto [ch, day] = jobs[j];
    const auto& target = *channels[ch].series;
    const std::size_t begin = (day - options.enhance.train_days) * kHoursPerDay;
    const std::size_t count = options.enhance.train_days * kHoursPerDay;
    std::vector<RoiTimeSeries> candidates;
    std::vector<std::size_t> candidate_channel;
    for (std::size_t i = 0; i < channels.size(); ++i) {
      if (i == ch || channels[i].direction != channels[ch].direction) continue;
      candidates.push_back(residual[i].slice(begin, count));
      candidate_channel.push_back(i);
    }
    const auto picked =
        forecast::correlated_rois(residual[ch].slice(begin, count), candidates, options.max_lag, top_k);
    std::vector<RoiTimeSeries> helpers;
    EnhancementRow row;
    for (const auto& p : picked) {
      for (std::size_t c = 0; c < candidates.size(); ++c) {
        if (candidates[c].roi_id == p.candidate_roi) helpers.push_back(residual[candidate_channel[c]]);
      }
      row.helpers.push_back(p.candidate_roi);
    }
    const auto f = forecast::enhanced_forecast(target, helpers, profiles[ch], day, options.enhance);
    row.roi_id = target.roi_id;
    row.direction = channels[ch].direction;
    row.day = day;
    row.var_order = f.var_order;
    row.var_mae = f.errors.mean_absolute();
    row.arma_mae = f.local_errors.mean_absolute();
    row.improvement = f.improvement;
    row.fell_back = f.fell_back;
    report.enhancements[j] = std::move(row);
  });

  auto& s = report.summary;
  s.rounds = aggregates.rounds().size();
  s.forecast_slots = report.forecasts.size();
  s.seasonal_mae = mean_abs(report.forecasts);
  s.baseline_mae = mean_abs(report.baseline);
  s.ranked = report.events.size();
  s.enhanced = report.enhancements.size();
  double sum = 0.0;
  for (const auto& e : report.enhancements) sum += e.improvement;
  s.mean_improvement = s.enhanced ? sum / static_cast<double>(s.enhanced) : 0.0;
  return report;
}

PipelineRun run_pipeline(const SimConfig& config, const PipelineSource& source, const AnalysisOptions& options) {
  auto aggregates = collect_aggregates(config, source);
  auto report = analyze(aggregates, options);
  return PipelineRun{std::move(aggregates), std::move(report)};
}

void write_forecast_csv(std::ostream& out, std::span<const ForecastRow> rows) {
  out << "roi_id,epoch,actual,predicted,abs_err,pct_err\n";
  for (const auto& r : rows) {
    out << r.roi_id << ',' << r.epoch << ',' << csv::format_double(r.actual) << ','
        << csv::format_double(r.predicted) << ',' << csv::format_double(r.abs_err) << ','
        << (r.pct_err ? csv::format_double(*r.pct_err) : "") << '\n';
  }
}

void write_anomaly_csv(std::ostream& out, std::span<const forecast::AnomalyEvent> events) {
  out << "roi_id,epoch,direction,residual,lambda1,lambda2,magnitude,rank\n";
  std::size_t rank = 0;
  for (const auto& e : events) {
    out << e.roi_id << ',' << e.epoch_index << ',' << forecast::to_string(e.direction) << ','
        << csv::format_double(e.residual) << ',' << csv::format_double(e.lambda1) << ','
        << csv::format_double(e.lambda2) << ',' << csv::format_double(e.magnitude) << ',' << ++rank << '\n';
  }
}

void write_enhancement_csv(std::ostream& out, std::span<const EnhancementRow> rows) {
  out << "roi_id,direction,day,helpers,var_order,var_mae,arma_mae,improvement,fell_back\n";
  for (const auto& r : rows) {
    std::string helpers;
    for (auto h : r.helpers) helpers += (helpers.empty() ? "" : ";") + std::to_string(h);
    out << r.roi_id << ',' << forecast::to_string(r.direction) << ',' << r.day << ',' << helpers << ','
        << r.var_order << ',' << csv::format_double(r.var_mae) << ',' << csv::format_double(r.arma_mae) << ','
        << csv::format_double(r.improvement) << ',' << (r.fell_back ? 1 : 0) << '\n';
  }
}

nlohmann::json to_json(const PipelineSummary& s) {
  return nlohmann::json{{"rounds", s.rounds},
                        {"forecast_slots", s.forecast_slots},
                        {"seasonal_mae", s.seasonal_mae},
                        {"baseline_mae", s.baseline_mae},
                        {"anomalies", s.anomalies},
                        {"ranked", s.ranked},
                        {"enhanced", s.enhanced},
                        {"skipped_events", s.skipped_events},
                        {"mean_improvement", s.mean_improvement}};
}

void write_pipeline_reports(const std::filesystem::path& dir, const PipelineReport& report) {
  std::filesystem::create_directories(dir);
  const auto open = [&](const char* name) {
    std::ofstream f(dir / name);
    if (!f) throw ValidationError("cannot write " + (dir / name).string());
    return f;
  };
  auto forecasts = open("forecast.csv");
  write_forecast_csv(forecasts, report.forecasts);
  auto baseline = open("baseline.csv");
  write_forecast_csv(baseline, report.baseline);
  auto anomalies = open("anomalies.csv");
  write_anomaly_csv(anomalies, report.events);
  auto enhancement = open("enhancement.csv");
  write_enhancement_csv(enhancement, report.enhancements);
  auto summary = open("summary.json");
  summary << to_json(report.summary).dump(2) << '\n';
}

}  // namespace mobagg::harness
