#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mobagg/core/series.h"

namespace mobagg::forecast {

// Ranks starting at 1; tied values share the average of their positions.
std::vector<double> average_ranks(std::span<const double> values);

// Spearman's r_s. Tie-free inputs use 1 - 6 sum d^2 / (n (n^2 - 1)); with
// ties the Pearson correlation of the average ranks is returned. nullopt
// when either input is constant. Requires equal lengths n >= 3.
std::optional<double> spearman(std::span<const double> x, std::span<const double> y);

struct CorrelationResult {
  std::int64_t target_roi = 0;
  std::int64_t candidate_roi = 0;
  int lag = 0;  // positive: the candidate leads the target by `lag` epochs
  double rho = 0.0;
};

// Spearman between target[t] and candidate[t - lag] over the overlap.
std::optional<double> lagged_spearman(std::span<const double> target, std::span<const double> candidate, int lag);

// For each candidate, the lag in [-max_lag, max_lag] with the largest |r_s|
// (smaller |lag|, then negative lag, first on ties). Returns the top_k
// candidates by |r_s|, ties broken by smaller roi id. Candidates with the
// target's roi id, or whose correlation is undefined at every lag, are skipped.
std::vector<CorrelationResult> correlated_rois(const RoiTimeSeries& target, std::span<const RoiTimeSeries> candidates,
                                               int max_lag = 1, std::size_t top_k = 10);

// Serial reference for the same scan; kept for equivalence tests and benchmarks.
std::vector<CorrelationResult> correlated_rois_serial(const RoiTimeSeries& target,
                                                      std::span<const RoiTimeSeries> candidates, int max_lag = 1,
                                                      std::size_t top_k = 10);

}  // namespace mobagg::forecast
