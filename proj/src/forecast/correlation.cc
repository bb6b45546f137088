#include "mobagg/forecast/correlation.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mobagg/core/error.h"

namespace mobagg::forecast {
namespace {

std::optional<CorrelationResult> best_lag(const RoiTimeSeries& target, const RoiTimeSeries& candidate, int max_lag) {
  std::optional<CorrelationResult> best;
  // Visit lags by increasing |lag|, negative first, so strict improvement keeps the tie rule.
  for (int magnitude = 0; magnitude <= max_lag; ++magnitude) {
    for (int lag : {-magnitude, magnitude}) {
      if (magnitude == 0 && lag != 0) continue;
      const auto rho = lagged_spearman(target.values, candidate.values, lag);
      if (!rho) continue;
      if (!best || std::abs(*rho) > std::abs(best->rho)) {
        best = CorrelationResult{target.roi_id, candidate.roi_id, lag, *rho};
      }
      if (magnitude == 0) break;
    }
  }
  return best;
}

std::vector<CorrelationResult> top_results(std::vector<std::optional<CorrelationResult>>& scored, std::size_t top_k) {
  std::vector<CorrelationResult> results;
  for (auto& r : scored) {
    if (r) results.push_back(*r);
  }
  std::sort(results.begin(), results.end(), [](const CorrelationResult& a, const CorrelationResult& b) {
    if (std::abs(a.rho) != std::abs(b.rho)) return std::abs(a.rho) > std::abs(b.rho);
    return a.candidate_roi < b.candidate_roi;
  });
  if (results.size() > top_k) results.resize(top_k);
  return results;
}

void check_aligned(const RoiTimeSeries& target, std::span<const RoiTimeSeries> candidates, int max_lag) {
  if (max_lag < 0) throw ValidationError("max lag must be non-negative");
  for (const auto& c : candidates) {
    if (c.size() != target.size()) throw ValidationError("candidate series are not aligned with the target");
  }
}

}  // namespace

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i + 1;
    while (j < order.size() && values[order[j]] == values[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + 1 + j);  // mean of positions i+1..j
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = avg;
    i = j;
  }
  return ranks;
}

std::optional<double> spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("spearman inputs differ in length");
  const std::size_t n = x.size();
  if (n < 3) throw ValidationError("spearman needs at least 3 observations");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);

  auto has_ties = [](std::vector<double> r) {
    std::sort(r.begin(), r.end());
    return std::adjacent_find(r.begin(), r.end()) != r.end();
  };
  const bool ties = has_ties(rx) || has_ties(ry);

  const double mean = 0.5 * static_cast<double>(n + 1);
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  double d2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = rx[i] - mean;
    const double b = ry[i] - mean;
    sxx += a * a;
    syy += b * b;
    sxy += a * b;
    d2 += (rx[i] - ry[i]) * (rx[i] - ry[i]);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  if (!ties) {
    const double nn = static_cast<double>(n);
    return 1.0 - 6.0 * d2 / (nn * (nn * nn - 1.0));
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::optional<double> lagged_spearman(std::span<const double> target, std::span<const double> candidate, int lag) {
  if (target.size() != candidate.size()) throw ValidationError("lagged series differ in length");
  const std::size_t shift = static_cast<std::size_t>(std::abs(lag));
  if (target.size() < shift + 3) return std::nullopt;
  const std::size_t overlap = target.size() - shift;
  // lag > 0: target[t] pairs with candidate[t - lag], t in [lag, n).
  const auto t_part = lag >= 0 ? target.subspan(shift, overlap) : target.subspan(0, overlap);
  const auto c_part = lag >= 0 ? candidate.subspan(0, overlap) : candidate.subspan(shift, overlap);
  return spearman(t_part, c_part);
}

std::vector<CorrelationResult> correlated_rois_serial(const RoiTimeSeries& target,
                                                      std::span<const RoiTimeSeries> candidates, int max_lag,
                                                      std::size_t top_k) {
  check_aligned(target, candidates, max_lag);
  std::vector<std::optional<CorrelationResult>> scored(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (candidates[i].roi_id == target.roi_id) continue;
    scored[i] = best_lag(target, candidates[i], max_lag);
  }
  return top_results(scored, top_k);
}

std::vector<CorrelationResult> correlated_rois(const RoiTimeSeries& target, std::span<const RoiTimeSeries> candidates,
                                               int max_lag, std::size_t top_k) {
  check_aligned(target, candidates, max_lag);
  std::vector<std::optional<CorrelationResult>> scored(candidates.size());
  const auto n = static_cast<std::ptrdiff_t>(candidates.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto& c = candidates[static_cast<std::size_t>(i)];
    if (c.roi_id == target.roi_id) continue;
    scored[static_cast<std::size_t>(i)] = best_lag(target, c, max_lag);
  }
  return top_results(scored, top_k);
}

}  // namespace mobagg::forecast
