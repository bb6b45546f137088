#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "mobagg/core/series.h"
#include "mobagg/forecast/anomaly.h"
#include "mobagg/forecast/enhance.h"
#include "mobagg/forecast/rolling.h"
#include "mobagg/harness/sim.h"

namespace mobagg::harness {

// Ground truth the simulated users report. Station data has tap-in and
// tap-out series per station; grid data has one presence series per cell.
// Every series shares one epoch axis and holds non-negative integer counts.
struct PipelineSource {
  enum class Layout { kStation, kGrid };
  Layout layout = Layout::kStation;
  std::vector<RoiTimeSeries> in;
  std::vector<RoiTimeSeries> out;
  std::vector<RoiTimeSeries> cells;

  static PipelineSource stations(std::vector<RoiTimeSeries> in, std::vector<RoiTimeSeries> out);
  static PipelineSource grid(std::vector<RoiTimeSeries> cells);

  void validate() const;
  const EpochSpec& epochs() const;
};

// Per-ROI series rebuilt from protocol aggregates, one round per epoch. Only
// collect_aggregates can create one, so analytics built on it cannot be fed
// per-user vectors.
class AggregateSeries {
 public:
  PipelineSource::Layout layout() const { return layout_; }
  // Station layout: Y_in and Y_out per station. Grid layout: both empty.
  const std::vector<RoiTimeSeries>& in() const { return in_; }
  const std::vector<RoiTimeSeries>& out() const { return out_; }
  // Y per ROI: Y_in + Y_out for stations, presence counts for cells.
  const std::vector<RoiTimeSeries>& combined() const { return combined_; }
  const std::vector<RoundReport>& rounds() const { return rounds_; }

 private:
  AggregateSeries() = default;
  friend AggregateSeries collect_aggregates(const SimConfig& config, const PipelineSource& source);

  PipelineSource::Layout layout_ = PipelineSource::Layout::kStation;
  std::vector<RoiTimeSeries> in_;
  std::vector<RoiTimeSeries> out_;
  std::vector<RoiTimeSeries> combined_;
  std::vector<RoundReport> rounds_;
};

// Runs one protocol round per epoch. Each round spreads the epoch's true
// counts over config.n_users simulated users (synthesize_users), aggregates
// their vectors through simulate_round and keeps only the decoded aggregate.
// The vector dimensions (n_stations or grid_side) are taken from the source;
// sketch mode needs station data, grid mode needs a square number of cells.
AggregateSeries collect_aggregates(const SimConfig& config, const PipelineSource& source);

struct AnalysisOptions {
  // ROIs to forecast, scan and enhance; empty means all. Every ROI still
  // competes as a helper candidate.
  std::vector<std::int64_t> rois;
  forecast::RollingOptions rolling;  // `deseasonalize` is set per method
  // Days forecast per ROI; empty means every day of the last week.
  std::vector<std::size_t> forecast_days;
  forecast::ScanOptions scan;
  double keep_fraction = 0.10;
  forecast::EnhanceOptions enhance;
  // Helpers per enhanced event; empty means 10 for stations and 5 for cells.
  std::optional<std::size_t> top_k;
  int max_lag = 1;
};

struct ForecastRow {
  std::int64_t roi_id = 0;
  std::size_t epoch = 0;
  double actual = 0.0;
  double predicted = 0.0;
  double abs_err = 0.0;
  std::optional<double> pct_err;
};

struct EnhancementRow {
  std::int64_t roi_id = 0;
  forecast::Direction direction = forecast::Direction::kCombined;
  std::size_t day = 0;
  std::vector<std::int64_t> helpers;
  std::size_t var_order = 0;
  double var_mae = 0.0;
  double arma_mae = 0.0;
  double improvement = 0.0;
  bool fell_back = false;
};

struct PipelineSummary {
  std::size_t rounds = 0;
  std::size_t forecast_slots = 0;
  double seasonal_mae = 0.0;  // de-seasonalized rolling forecaster
  double baseline_mae = 0.0;  // ARMA fitted directly on Y
  std::size_t anomalies = 0;  // 3-sigma violations before ranking
  std::size_t ranked = 0;
  std::size_t enhanced = 0;
  std::size_t skipped_events = 0;  // ranked events too early for the enhancement window
  double mean_improvement = 0.0;
};

struct PipelineReport {
  std::vector<ForecastRow> forecasts;  // de-seasonalized forecaster
  std::vector<ForecastRow> baseline;
  std::vector<forecast::AnomalyEvent> events;  // ranked
  std::vector<EnhancementRow> enhancements;
  PipelineSummary summary;
};

PipelineReport analyze(const AggregateSeries& aggregates, const AnalysisOptions& options = {});

struct PipelineRun {
  AggregateSeries aggregates;
  PipelineReport report;
};

PipelineRun run_pipeline(const SimConfig& config, const PipelineSource& source, const AnalysisOptions& options = {});

// `roi_id,epoch,actual,predicted,abs_err,pct_err`; pct_err is empty where actual is 0.
void write_forecast_csv(std::ostream& out, std::span<const ForecastRow> rows);
// `roi_id,epoch,direction,residual,lambda1,lambda2,magnitude,rank`, rank from 1.
void write_anomaly_csv(std::ostream& out, std::span<const forecast::AnomalyEvent> events);
// `roi_id,direction,day,helpers,var_order,var_mae,arma_mae,improvement,fell_back`,
// helpers separated by ';'.
void write_enhancement_csv(std::ostream& out, std::span<const EnhancementRow> rows);
nlohmann::json to_json(const PipelineSummary& summary);

// forecast.csv, baseline.csv, anomalies.csv, enhancement.csv and summary.json in `dir`.
void write_pipeline_reports(const std::filesystem::path& dir, const PipelineReport& report);

}  // namespace mobagg::harness
