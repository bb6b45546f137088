// Serial references against their OpenMP kernels. Thread count follows
// OMP_NUM_THREADS; on one core the pairs should run at the same speed.

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "mobagg/forecast/correlation.h"
#include "mobagg/harness/fixtures.h"
#include "mobagg/privagg/masking.h"

namespace {

using namespace mobagg;

std::vector<privagg::PairTerm> random_terms(std::size_t n) {
  std::mt19937_64 rng(7);
  std::vector<privagg::PairTerm> terms(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& b : terms[i].point) b = static_cast<std::uint8_t>(rng());
    terms[i].subtract = i % 2 == 1;
  }
  return terms;
}

// Args: group size minus one (peers), report length T.
template <bool Parallel>
void BM_SignedDigestSum(benchmark::State& state) {
  const auto terms = random_terms(static_cast<std::size_t>(state.range(0)));
  const auto T = static_cast<std::size_t>(state.range(1));
  for (auto _ : state) {
    auto out = Parallel ? privagg::signed_digest_sum(terms, T, 3) : privagg::signed_digest_sum_serial(terms, T, 3);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(1));
}
BENCHMARK(BM_SignedDigestSum<false>)->Args({19, 582})->Args({49, 10000});
BENCHMARK(BM_SignedDigestSum<true>)->Args({19, 582})->Args({49, 10000});

struct RoiSet {
  RoiTimeSeries target;
  std::vector<RoiTimeSeries> candidates;
};

const RoiSet& roi_set(std::size_t n) {
  static std::vector<std::pair<std::size_t, RoiSet>> cache;
  for (const auto& [k, v] : cache) {
    if (k == n) return v;
  }
  RoiSet set;
  set.target = harness::seasonal_ar_fixture(1, {}, 0).series;
  for (std::size_t i = 1; i <= n; ++i) {
    set.candidates.push_back(harness::seasonal_ar_fixture(1 + i, {}, static_cast<std::int64_t>(i)).series);
  }
  cache.emplace_back(n, std::move(set));
  return cache.back().second;
}

// Arg: number of candidate ROIs.
template <bool Parallel>
void BM_CorrelatedRois(benchmark::State& state) {
  const auto& set = roi_set(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto out = Parallel ? forecast::correlated_rois(set.target, set.candidates)
                        : forecast::correlated_rois_serial(set.target, set.candidates);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CorrelatedRois<false>)->Arg(50)->Arg(200);
BENCHMARK(BM_CorrelatedRois<true>)->Arg(50)->Arg(200);

}  // namespace

BENCHMARK_MAIN();
