#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mobagg/core/csv.h"
#include "mobagg/core/error.h"
#include "mobagg/forecast/anomaly.h"
#include "mobagg/forecast/correlation.h"
#include "mobagg/forecast/enhance.h"
#include "mobagg/forecast/rolling.h"
#include "mobagg/harness/pipeline.h"
#include "mobagg/harness/sim.h"
#include "mobagg/ingest/binning.h"
#include "mobagg/ingest/records.h"
#include "mobagg/ingest/series_io.h"
#include "mobagg/sketch/count_min.h"
#include "mobagg/timeseries/seasonal.h"
#include "mobagg/timeseries/stationarity.h"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mobagg;

namespace {

struct Globals {
  std::uint64_t seed = 1;
  bool seed_set = false;
  std::string config;
  fs::path out = ".";
  bool strict = false;
};

// Warnings become validation errors under --strict.
void warn(const Globals& g, const std::string& message) {
  if (g.strict) throw ValidationError(message);
  std::cerr << "warning: " << message << '\n';
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::ofstream open_out(const Globals& g, const std::string& name) {
  fs::create_directories(g.out);
  std::ofstream f(g.out / name);
  if (!f) throw ValidationError("cannot write " + (g.out / name).string());
  return f;
}

const RoiTimeSeries& find_roi(const std::vector<RoiTimeSeries>& series, std::int64_t roi) {
  for (const auto& s : series) {
    if (s.roi_id == roi) return s;
  }
  throw ValidationError("no series for roi " + std::to_string(roi));
}

ts::SeasonalProfile profile_for(const Globals& g, const RoiTimeSeries& s) {
  const auto t = ts::seasonal_profile_truncating(s);
  if (t.dropped_epochs > 0) {
    warn(g, "roi " + std::to_string(s.roi_id) + ": profile ignores a trailing partial week of " +
                std::to_string(t.dropped_epochs) + " epochs");
  }
  return t.profile;
}

// Smallest hourly range covering every timestamp.
EpochSpec covering_epochs(const std::vector<Seconds>& times) {
  if (times.empty()) throw ValidationError("no records to derive an epoch range from");
  const auto [lo, hi] = std::minmax_element(times.begin(), times.end());
  EpochSpec e;
  e.start = *lo - ((*lo % kSecondsPerHour) + kSecondsPerHour) % kSecondsPerHour;
  e.n_epochs = static_cast<std::size_t>((*hi - e.start) / kSecondsPerHour) + 1;
  return e;
}

// ---- ingest ----

struct IngestArgs {
  std::string trips;
  std::string gps;
  std::optional<std::size_t> n_stations;
  std::string mode_column;
  std::vector<std::string> exclude_modes;
};

int run_ingest(const Globals& g, const IngestArgs& a) {
  if (a.trips.empty() == a.gps.empty()) throw ValidationError("ingest needs exactly one of --trips or --gps");
  json cfg = g.config.empty() ? json::object() : read_json(g.config);
  std::optional<EpochSpec> epochs;
  if (cfg.contains("epochs")) epochs = ingest::epochs_from_json(cfg.at("epochs"));
  const auto mode = g.strict ? ingest::ParseMode::kStrict : ingest::ParseMode::kLenient;
  const auto report_errors = [&](const std::vector<ingest::RowError>& errors) {
    constexpr std::size_t kShown = 10;
    for (std::size_t i = 0; i < errors.size() && i < kShown; ++i) {
      std::cerr << "line " << errors[i].line << ": " << errors[i].message << '\n';
    }
    if (errors.size() > kShown) std::cerr << "... and " << errors.size() - kShown << " more\n";
    if (!errors.empty()) warn(g, std::to_string(errors.size()) + " malformed rows skipped");
  };

  if (!a.trips.empty()) {
    std::ifstream in(a.trips);
    if (!in) throw ValidationError("cannot read " + a.trips);
    ingest::TripParseOptions opts;
    opts.mode = mode;
    opts.schema.mode = a.mode_column.empty() ? cfg.value("mode_column", std::string()) : a.mode_column;
    opts.exclude_modes =
        a.exclude_modes.empty() ? cfg.value("exclude_modes", std::vector<std::string>()) : a.exclude_modes;
    std::optional<std::size_t> n_stations = a.n_stations;
    if (!n_stations && cfg.contains("n_stations")) n_stations = cfg.at("n_stations").get<std::size_t>();
    opts.n_stations = n_stations;
    const auto parsed = ingest::parse_trips(in, opts);
    report_errors(parsed.errors);
    if (!epochs) {
      std::vector<Seconds> times;
      for (const auto& t : parsed.records) {
        times.push_back(t.start_time);
        times.push_back(t.end_time);
      }
      epochs = covering_epochs(times);
    }
    std::size_t stations = n_stations.value_or(0);
    if (!n_stations) {
      for (const auto& t : parsed.records) {
        stations = std::max<std::size_t>({stations, t.start_station + 1u, t.end_station + 1u});
      }
    }
    const auto series = ingest::station_series(parsed.records, *epochs, stations);
    if (series.dropped_events > 0) {
      warn(g, std::to_string(series.dropped_events) + " tap events fell outside the epoch range");
    }
    fs::create_directories(g.out);
    ingest::save_series(g.out / "in.csv", series.in);
    ingest::save_series(g.out / "out.csv", series.out);
    ingest::save_series(g.out / "combined.csv", series.combined());
    std::cout << parsed.records.size() << " trips (" << parsed.excluded << " excluded, " << parsed.errors.size()
              << " malformed) into " << stations << " stations x " << epochs->n_epochs << " epochs\n";
    return 0;
  }

  std::ifstream in(a.gps);
  if (!in) throw ValidationError("cannot read " + a.gps);
  const auto parsed = ingest::parse_gps(in, mode);
  report_errors(parsed.errors);
  const auto grid = cfg.contains("grid") ? ingest::grid_from_json(cfg.at("grid")) : ingest::GridSpec::san_francisco();
  if (!epochs) {
    std::vector<Seconds> times;
    for (const auto& p : parsed.records) times.push_back(p.timestamp);
    epochs = covering_epochs(times);
  }
  const auto cells = ingest::grid_series(parsed.records, grid, *epochs);
  fs::create_directories(g.out);
  ingest::save_series(g.out / "cells.csv", cells, grid);
  std::cout << parsed.records.size() << " points (" << parsed.errors.size() << " malformed) into "
            << grid.cell_count() << " cells x " << epochs->n_epochs << " epochs\n";
  return 0;
}

// ---- forecast ----

struct ForecastArgs {
  std::string series;
  std::string profile;
  std::vector<std::int64_t> rois;
  std::vector<std::size_t> days;
  std::size_t train_days = 5;
};

int run_forecast(const Globals& g, const ForecastArgs& a) {
  const auto all = ingest::load_series(a.series);
  std::optional<ts::SeasonalProfile> shared;
  if (!a.profile.empty()) shared = ts::profile_from_json(read_json(a.profile));

  forecast::RollingOptions opts;
  opts.train_days = a.train_days;
  std::vector<harness::ForecastRow> seasonal;
  std::vector<harness::ForecastRow> baseline;
  auto stationarity = open_out(g, "stationarity.csv");
  stationarity << "roi_id,adf_statistic,critical_value,stationary\n";
  for (const auto& s : all) {
    if (!a.rois.empty() && std::find(a.rois.begin(), a.rois.end(), s.roi_id) == a.rois.end()) continue;
    const auto profile = shared ? *shared : profile_for(g, s);
    const auto d = ts::deseasonalize(s, profile);
    const auto adf = ts::adf_stationary(d.values);
    stationarity << s.roi_id << ',' << csv::format_double(adf.statistic) << ','
                 << csv::format_double(adf.critical_value) << ',' << (adf.stationary ? 1 : 0) << '\n';
    if (!adf.stationary) warn(g, "roi " + std::to_string(s.roi_id) + ": de-seasonalized series is not stationary");

    std::vector<std::size_t> days = a.days;
    if (days.empty()) {
      const std::size_t n_days = s.size() / kHoursPerDay;
      const std::size_t first = std::max(a.train_days, n_days > 7 ? n_days - 7 : 0);
      for (std::size_t day = first; day < n_days; ++day) days.push_back(day);
    }
    for (auto day : days) {
      for (bool deseasonalize : {true, false}) {
        opts.deseasonalize = deseasonalize;
        const auto f = forecast::rolling_forecast(s, profile, day, opts);
        auto& rows = deseasonalize ? seasonal : baseline;
        for (std::size_t i = 0; i < f.actual.size(); ++i) {
          rows.push_back({s.roi_id, day * kHoursPerDay + i, f.actual.values[i], f.predicted.values[i],
                          f.errors.absolute[i], f.errors.percentage[i]});
        }
      }
    }
  }
  auto out = open_out(g, "forecast.csv");
  harness::write_forecast_csv(out, seasonal);
  auto base = open_out(g, "baseline.csv");
  harness::write_forecast_csv(base, baseline);
  const auto mae = [](const std::vector<harness::ForecastRow>& rows) {
    double s = 0.0;
    for (const auto& r : rows) s += r.abs_err;
    return rows.empty() ? 0.0 : s / static_cast<double>(rows.size());
  };
  std::cout << seasonal.size() << " slots forecast; MAE de-seasonalized " << mae(seasonal) << ", baseline "
            << mae(baseline) << '\n';
  return 0;
}

// ---- anomalies ----

struct AnomalyArgs {
  std::string series;
  std::string direction = "combined";
  std::size_t train_weeks = 1;
  double keep = 0.10;
};

forecast::Direction parse_direction(const std::string& d) {
  if (d == "in") return forecast::Direction::kIn;
  if (d == "out") return forecast::Direction::kOut;
  if (d == "combined") return forecast::Direction::kCombined;
  throw ValidationError("direction must be in, out or combined");
}

int run_anomalies(const Globals& g, const AnomalyArgs& a) {
  const auto all = ingest::load_series(a.series);
  const auto direction = parse_direction(a.direction);
  forecast::ScanOptions opts;
  opts.train_weeks = a.train_weeks;
  std::vector<forecast::AnomalyEvent> events;
  for (const auto& s : all) {
    const auto scan = forecast::scan_anomalies(s, profile_for(g, s), opts, direction);
    events.insert(events.end(), scan.events.begin(), scan.events.end());
  }
  const auto ranked = forecast::rank_anomalies(events, a.keep);
  auto out = open_out(g, "anomalies.csv");
  harness::write_anomaly_csv(out, ranked);
  std::cout << events.size() << " threshold violations, " << ranked.size() << " ranked\n";
  return 0;
}

// ---- enhance ----

struct EnhanceArgs {
  std::string series;
  std::string candidates;
  std::int64_t roi = 0;
  std::vector<std::size_t> days;
  std::size_t top_k = 10;
  std::size_t train_days = 14;
  int max_lag = 1;
};

int run_enhance(const Globals& g, const EnhanceArgs& a) {
  const auto all = ingest::load_series(a.series);
  const auto& target = find_roi(all, a.roi);
  const auto pool = a.candidates.empty() ? all : ingest::load_series(a.candidates);
  if (a.days.empty()) throw ValidationError("enhance needs at least one --day");
  const auto profile = profile_for(g, target);

  std::vector<RoiTimeSeries> residuals;
  for (const auto& c : pool) {
    if (c.roi_id != target.roi_id) residuals.push_back(ts::deseasonalize(c, profile_for(g, c)));
  }
  forecast::EnhanceOptions opts;
  opts.train_days = a.train_days;

  std::vector<harness::EnhancementRow> rows;
  std::vector<harness::ForecastRow> forecasts;
  for (auto day : a.days) {
    if (day < a.train_days) throw ValidationError("day " + std::to_string(day) + " precedes the training window");
    const std::size_t begin = (day - a.train_days) * kHoursPerDay;
    const std::size_t count = a.train_days * kHoursPerDay;
    std::vector<RoiTimeSeries> windows;
    for (const auto& r : residuals) windows.push_back(r.slice(begin, count));
    const auto d_target = ts::deseasonalize(target, profile).slice(begin, count);
    const auto picked = forecast::correlated_rois(d_target, windows, a.max_lag, a.top_k);
    std::vector<RoiTimeSeries> helpers;
    harness::EnhancementRow row;
    for (const auto& p : picked) {
      helpers.push_back(find_roi(residuals, p.candidate_roi));
      row.helpers.push_back(p.candidate_roi);
    }
    const auto f = forecast::enhanced_forecast(target, helpers, profile, day, opts);
    if (f.fell_back) warn(g, "day " + std::to_string(day) + ": VAR fit failed, local ARMA used");
    row.roi_id = target.roi_id;
    row.day = day;
    row.var_order = f.var_order;
    row.var_mae = f.errors.mean_absolute();
    row.arma_mae = f.local_errors.mean_absolute();
    row.improvement = f.improvement;
    row.fell_back = f.fell_back;
    rows.push_back(row);
    for (std::size_t i = 0; i < f.actual.size(); ++i) {
      forecasts.push_back({target.roi_id, day * kHoursPerDay + i, f.actual.values[i], f.predicted.values[i],
                           f.errors.absolute[i], f.errors.percentage[i]});
    }
    std::cout << "day " << day << ": " << helpers.size() << " helpers, improvement " << f.improvement << '\n';
  }
  auto out = open_out(g, "enhancement.csv");
  harness::write_enhancement_csv(out, rows);
  auto fc = open_out(g, "enhanced_forecast.csv");
  harness::write_forecast_csv(fc, forecasts);
  return 0;
}

// ---- simulate ----

struct SimulateArgs {
  std::string data;
  std::vector<std::int64_t> rois;
};

harness::PipelineSource load_source(const fs::path& dir) {
  if (fs::exists(dir / "in.csv") && fs::exists(dir / "out.csv")) {
    return harness::PipelineSource::stations(ingest::load_series(dir / "in.csv"), ingest::load_series(dir / "out.csv"));
  }
  if (fs::exists(dir / "cells.csv")) return harness::PipelineSource::grid(ingest::load_series(dir / "cells.csv"));
  throw ValidationError(dir.string() + " holds neither in.csv/out.csv nor cells.csv");
}

// Random presence vectors: each entry is 1 with probability 0.1.
std::vector<std::vector<std::uint32_t>> random_inputs(const harness::SimConfig& c, std::mt19937_64& rng) {
  std::bernoulli_distribution present(0.1);
  std::vector<std::vector<std::uint32_t>> users(c.n_users, std::vector<std::uint32_t>(c.input_length()));
  for (auto& u : users) {
    for (auto& x : u) x = present(rng) ? 1u : 0u;
  }
  return users;
}

int run_simulate(const Globals& g, const SimulateArgs& a) {
  harness::SimConfig config;
  if (!g.config.empty()) config = harness::sim_config_from_json(read_json(g.config));
  if (g.seed_set) config.seed = g.seed;
  config.validate();

  std::vector<harness::RoundReport> reports;
  if (!a.data.empty()) {
    harness::AnalysisOptions options;
    options.rois = a.rois;
    const auto run = harness::run_pipeline(config, load_source(a.data), options);
    harness::write_pipeline_reports(g.out, run.report);
    reports = run.aggregates.rounds();
    const auto& s = run.report.summary;
    std::cout << s.rounds << " rounds; forecast MAE " << s.seasonal_mae << " (baseline " << s.baseline_mae << "), "
              << s.ranked << " ranked anomalies, " << s.enhanced << " enhanced days\n";
  } else {
    harness::Population population(config.n_users, config.seed);
    std::mt19937_64 rng(config.seed);
    for (std::size_t r = 0; r < config.epochs; ++r) {
      const auto users = random_inputs(config, rng);
      reports.push_back(harness::simulate_round(config, population, r, users).report);
    }
  }
  json rounds = json::array();
  for (const auto& r : reports) rounds.push_back(harness::to_json(r));
  auto out = open_out(g, "rounds.json");
  out << json{{"config", harness::to_json(config)}, {"rounds", rounds}}.dump(2) << '\n';
  const auto rows = harness::overhead_report(reports);
  auto csv_out = open_out(g, "overhead.csv");
  harness::write_overhead_csv(csv_out, rows);
  harness::write_overhead_csv(std::cout, rows);
  return 0;
}

// ---- sketch-bench ----

struct SketchBenchArgs {
  std::vector<std::size_t> input_sizes{10000, 1000000};
  std::vector<double> epsilons{0.01};
  std::vector<double> deltas{0.01};
  std::size_t trials = 20;
  std::size_t stream = 20000;
};

int run_sketch_bench(const Globals& g, const SketchBenchArgs& a) {
  auto out = open_out(g, "sketch_bench.csv");
  const std::string header =
      "input_size,epsilon,delta,d,w,counters,bytes,raw_bytes,trials,mean_overestimate,max_overestimate,"
      "exceed_fraction\n";
  out << header;
  std::cout << header;
  std::mt19937_64 rng(g.seed);
  for (auto n : a.input_sizes) {
    for (auto eps : a.epsilons) {
      for (auto delta : a.deltas) {
        const auto params = sketch::make_params(n, eps, delta);
        double over_sum = 0.0;
        double over_max = 0.0;
        std::size_t checked = 0;
        std::size_t exceed = 0;
        for (std::size_t trial = 0; trial < a.trials; ++trial) {
          sketch::CountMinSketch cms(params, sketch::make_seeds(params.d, rng()));
          std::map<std::uint64_t, std::uint64_t> truth;
          // Skewed stream: item = floor(n * u^3) favours small ids.
          std::uniform_real_distribution<double> u(0.0, 1.0);
          for (std::size_t i = 0; i < a.stream; ++i) {
            const double x = u(rng);
            const auto cubed = static_cast<std::uint64_t>(static_cast<double>(n) * x * x * x);
            const auto item = std::min<std::uint64_t>(n - 1, cubed);
            cms.update(item, 1);
            ++truth[item];
          }
          const double bound = eps * static_cast<double>(a.stream);
          for (const auto& [item, count] : truth) {
            const double over = static_cast<double>(cms.estimate(item)) - static_cast<double>(count);
            over_sum += over;
            over_max = std::max(over_max, over);
            exceed += over > bound ? 1 : 0;
            ++checked;
          }
        }
        std::ostringstream row;
        row << n << ',' << csv::format_double(eps) << ',' << csv::format_double(delta) << ',' << params.d << ','
            << params.w << ',' << params.size() << ',' << params.size() * 4 << ',' << n * 4 << ',' << a.trials << ','
            << csv::format_double(checked ? over_sum / static_cast<double>(checked) : 0.0) << ','
            << csv::format_double(over_max) << ','
            << csv::format_double(checked ? static_cast<double>(exceed) / static_cast<double>(checked) : 0.0) << '\n';
        out << row.str();
        std::cout << row.str();
      }
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Private mobility aggregation and analytics"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  std::string out_dir = ".";
  app.add_option("--seed", g.seed, "RNG seed (overrides the config)")
      ->each([&](const std::string&) { g.seed_set = true; });
  app.add_option("--config", g.config, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "Output directory");
  app.add_flag("--strict", g.strict, "Treat malformed rows and warnings as errors");

  IngestArgs ingest_args;
  auto* ingest_cmd = app.add_subcommand("ingest", "Trip or GPS CSV to per-ROI hourly series");
  ingest_cmd->add_option("--trips", ingest_args.trips, "Trip CSV");
  ingest_cmd->add_option("--gps", ingest_args.gps, "GPS CSV");
  ingest_cmd->add_option("--stations", ingest_args.n_stations, "Number of stations");
  ingest_cmd->add_option("--mode-column", ingest_args.mode_column, "Column holding the transport mode");
  ingest_cmd->add_option("--exclude-mode", ingest_args.exclude_modes, "Transport mode to drop (repeatable)");

  ForecastArgs forecast_args;
  auto* forecast_cmd = app.add_subcommand("forecast", "Rolling one-step forecasts for series");
  forecast_cmd->add_option("--series", forecast_args.series, "Series CSV with JSON sidecar")->required();
  forecast_cmd->add_option("--profile", forecast_args.profile, "Seasonal profile JSON (default: from each series)");
  forecast_cmd->add_option("--roi", forecast_args.rois, "ROI to forecast (repeatable, default all)");
  forecast_cmd->add_option("--day", forecast_args.days, "Day to forecast (repeatable, default the last week)");
  forecast_cmd->add_option("--train-days", forecast_args.train_days, "Training window in days");

  AnomalyArgs anomaly_args;
  auto* anomalies_cmd = app.add_subcommand("anomalies", "Ranked 3-sigma anomaly events");
  anomalies_cmd->add_option("--series", anomaly_args.series, "Series CSV with JSON sidecar")->required();
  anomalies_cmd->add_option("--direction", anomaly_args.direction, "in, out or combined");
  anomalies_cmd->add_option("--train-weeks", anomaly_args.train_weeks, "Weeks used to train the detector");
  anomalies_cmd->add_option("--keep", anomaly_args.keep, "Fraction of events kept after ranking");

  EnhanceArgs enhance_args;
  auto* enhance_cmd = app.add_subcommand("enhance", "VAR forecasts with correlated ROIs against local ARMA");
  enhance_cmd->add_option("--series", enhance_args.series, "Series CSV holding the target")->required();
  enhance_cmd->add_option("--candidates", enhance_args.candidates, "Candidate series CSV (default: --series)");
  enhance_cmd->add_option("--roi", enhance_args.roi, "Target ROI")->required();
  enhance_cmd->add_option("--day", enhance_args.days, "Day to forecast (repeatable)")->required();
  enhance_cmd->add_option("--top-k", enhance_args.top_k, "Correlated ROIs used as helpers");
  enhance_cmd->add_option("--train-days", enhance_args.train_days, "Training window in days");
  enhance_cmd->add_option("--max-lag", enhance_args.max_lag, "Largest lag scanned for correlation");

  SimulateArgs simulate_args;
  auto* simulate_cmd = app.add_subcommand("simulate", "Protocol rounds from a simulation config");
  simulate_cmd->add_option("--data", simulate_args.data, "Ingested series directory to run the full pipeline on");
  simulate_cmd->add_option("--roi", simulate_args.rois, "ROI to analyze (repeatable, default all)");

  SketchBenchArgs bench_args;
  auto* bench_cmd = app.add_subcommand("sketch-bench", "Count-Min size and error table");
  bench_cmd->add_option("--input-size", bench_args.input_sizes, "Input domain sizes");
  bench_cmd->add_option("--epsilon", bench_args.epsilons, "Error factors");
  bench_cmd->add_option("--delta", bench_args.deltas, "Failure probabilities");
  bench_cmd->add_option("--trials", bench_args.trials, "Random streams per setting");
  bench_cmd->add_option("--stream", bench_args.stream, "Updates per stream");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  g.out = out_dir;

  try {
    if (*ingest_cmd) return run_ingest(g, ingest_args);
    if (*forecast_cmd) return run_forecast(g, forecast_args);
    if (*anomalies_cmd) return run_anomalies(g, anomaly_args);
    if (*enhance_cmd) return run_enhance(g, enhance_args);
    if (*simulate_cmd) return run_simulate(g, simulate_args);
    if (*bench_cmd) return run_sketch_bench(g, bench_args);
  } catch (const OracleMismatch& e) {
    std::cerr << "oracle mismatch: " << e.what() << '\n';
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
