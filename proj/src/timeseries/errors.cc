#include "mobagg/timeseries/errors.h"

#include <cmath>

#include "mobagg/core/error.h"

namespace mobagg::ts {

Summary summarize(std::span<const double> values) {
  Summary s;
  s.count = values.size();
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

ForecastErrors forecast_errors(std::span<const double> actual, std::span<const double> predicted) {
  if (actual.size() != predicted.size()) throw ValidationError("actual and predicted lengths differ");
  ForecastErrors out;
  out.absolute.reserve(actual.size());
  out.percentage.reserve(actual.size());
  std::vector<double> defined_pct;
  for (std::size_t t = 0; t < actual.size(); ++t) {
    const double e = std::abs(actual[t] - predicted[t]);
    out.absolute.push_back(e);
    if (actual[t] != 0.0) {
      const double p = e / std::abs(actual[t]) * 100.0;
      out.percentage.emplace_back(p);
      defined_pct.push_back(p);
    } else {
      out.percentage.emplace_back(std::nullopt);
    }
  }
  out.abs_summary = summarize(out.absolute);
  out.pct_summary = summarize(defined_pct);
  return out;
}

}  // namespace mobagg::ts
