#include "mobagg/core/series.h"

#include <utility>

#include "mobagg/core/error.h"

namespace mobagg {

RoiTimeSeries::RoiTimeSeries(std::int64_t id, std::vector<double> v, EpochSpec e, SeriesRole r)
    : roi_id(id), values(std::move(v)), epochs(e), role(r) {
  if (values.size() != epochs.n_epochs) {
    throw ValidationError("series length does not match n_epochs");
  }
}

RoiTimeSeries RoiTimeSeries::slice(std::size_t first, std::size_t count) const {
  if (first + count > values.size() || count == 0) {
    throw ValidationError("slice out of range");
  }
  EpochSpec e{epochs.epoch_start(first), epochs.epoch_length, count};
  return RoiTimeSeries(roi_id, {values.begin() + static_cast<std::ptrdiff_t>(first),
                                values.begin() + static_cast<std::ptrdiff_t>(first + count)},
                       e, role);
}

RoiTimeSeries operator+(const RoiTimeSeries& a, const RoiTimeSeries& b) {
  if (!(a.epochs == b.epochs)) throw ValidationError("series epochs differ");
  std::vector<double> sum(a.values.size());
  for (std::size_t i = 0; i < sum.size(); ++i) sum[i] = a.values[i] + b.values[i];
  return RoiTimeSeries(a.roi_id, std::move(sum), a.epochs, a.role);
}

}  // namespace mobagg
