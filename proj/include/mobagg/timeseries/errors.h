#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace mobagg::ts {

struct Summary {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 when fewer than two values
  std::size_t count = 0;
};

Summary summarize(std::span<const double> values);

// Absolute errors e_t = |actual - predicted| and percentage errors
// p_t = 100 e_t / actual. p_t is undefined where actual is 0 and such slots
// are left out of the percentage summary.
struct ForecastErrors {
  std::vector<double> absolute;
  std::vector<std::optional<double>> percentage;
  Summary abs_summary;
  Summary pct_summary;

  double mean_absolute() const { return abs_summary.mean; }
};

ForecastErrors forecast_errors(std::span<const double> actual, std::span<const double> predicted);

}  // namespace mobagg::ts
