#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "mobagg/core/error.h"
#include "mobagg/forecast/anomaly.h"
#include "mobagg/forecast/arma.h"
#include "mobagg/forecast/correlation.h"
#include "mobagg/forecast/enhance.h"
#include "mobagg/forecast/rolling.h"
#include "mobagg/forecast/var.h"
#include "mobagg/harness/fixtures.h"
#include "mobagg/timeseries/seasonal.h"

namespace mobagg::forecast {
namespace {

std::vector<double> ar1(double phi, std::size_t n, std::uint64_t seed, double c = 0.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> eps(0.0, 1.0);
  std::vector<double> y(n);
  double prev = c / (1.0 - phi);
  for (auto& v : y) v = prev = c + phi * prev + eps(rng);
  return y;
}

std::vector<double> white_noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> eps(0.0, 1.0);
  std::vector<double> y(n);
  for (auto& v : y) v = eps(rng);
  return y;
}

// ---- ARMA ----

TEST(FitArma, ConstantSeries) {
  const std::vector<double> y(50, 7.5);
  const auto m = fit_arma(y, 0, 0);
  EXPECT_NEAR(m.c, 7.5, 1e-12);
  EXPECT_NEAR(m.sigma2, 0.0, 1e-20);
  EXPECT_TRUE(m.phi.empty());
  EXPECT_TRUE(m.theta.empty());
}

TEST(FitArma, Ar1MatchesLeastSquaresOracle) {
  const auto y = ar1(0.7, 2000, 42);
  const auto m = fit_arma(y, 1, 0);
  ASSERT_EQ(m.phi.size(), 1u);
  EXPECT_GE(m.phi[0], 0.62);
  EXPECT_LE(m.phi[0], 0.78);

  // Closed-form simple regression of y_t on y_{t-1}.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(y.size() - 1);
  for (std::size_t t = 1; t < y.size(); ++t) {
    sx += y[t - 1];
    sy += y[t];
    sxx += y[t - 1] * y[t - 1];
    sxy += y[t - 1] * y[t];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double intercept = (sy - slope * sx) / n;
  EXPECT_NEAR(m.phi[0], slope, 1e-6);
  EXPECT_NEAR(m.c, intercept, 1e-6);
}

TEST(FitArma, Ma1MatchesMomentOracle) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> eps(0.0, 1.0);
  std::vector<double> y(5000);
  double prev = eps(rng);
  for (auto& v : y) {
    const double e = eps(rng);
    v = e + 0.5 * prev;
    prev = e;
  }
  const auto m = fit_arma(y, 0, 1);
  ASSERT_EQ(m.theta.size(), 1u);
  EXPECT_GE(m.theta[0], 0.4);
  EXPECT_LE(m.theta[0], 0.6);

  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  double c0 = 0, c1 = 0;
  for (std::size_t t = 0; t < y.size(); ++t) {
    c0 += (y[t] - mean) * (y[t] - mean);
    if (t > 0) c1 += (y[t] - mean) * (y[t - 1] - mean);
  }
  const double r1 = c1 / c0;
  const double moment = (1.0 - std::sqrt(1.0 - 4.0 * r1 * r1)) / (2.0 * r1);
  EXPECT_NEAR(m.theta[0], moment, 0.05);
}

TEST(FitArma, ResidualsReconstructTheFit) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> eps(0.0, 1.0);
  std::vector<double> y(600);
  double y1 = 0, y2 = 0, e1 = 0;
  for (auto& v : y) {
    const double e = eps(rng);
    v = 2.0 + 0.5 * y1 - 0.2 * y2 + e + 0.3 * e1;
    y2 = y1;
    y1 = v;
    e1 = e;
  }
  const auto m = fit_arma(y, 2, 1);
  ASSERT_EQ(m.residuals.size(), y.size());
  for (std::size_t t = m.conditioning; t < y.size(); ++t) {
    const std::span<const double> history(y.data(), t);
    const std::span<const double> residuals(m.residuals.data(), t);
    EXPECT_NEAR(forecast_one(m, history, residuals) + m.residuals[t], y[t], 1e-8);
  }
  for (std::size_t t = 0; t < m.conditioning; ++t) EXPECT_EQ(m.residuals[t], 0.0);
}

TEST(FitArma, Preconditions) {
  EXPECT_THROW(fit_arma(std::vector<double>(19, 1.0), 1, 0), ValidationError);
  std::vector<double> y = ar1(0.5, 100, 1);
  y[40] = std::nan("");
  EXPECT_THROW(fit_arma(y, 1, 0), ValidationError);
}

TEST(ForecastOne, Examples) {
  ArmaModel m;
  m.c = 3.25;
  EXPECT_EQ(forecast_one(m, {}, {}), 3.25);

  ArmaModel walk;
  walk.p = 1;
  walk.phi = {1.0};
  const std::vector<double> h{1.0, 5.0, 42.0};
  EXPECT_EQ(forecast_one(walk, h, {}), 42.0);

  ArmaModel hand;
  hand.p = 2;
  hand.q = 1;
  hand.c = 0.5;
  hand.phi = {0.6, -0.25};
  hand.theta = {0.4};
  const std::vector<double> history{9.0, 10.0, 12.0};
  const std::vector<double> residuals{0.0, 1.0, -2.0};
  EXPECT_DOUBLE_EQ(forecast_one(hand, history, residuals), 0.5 + 0.6 * 12.0 - 0.25 * 10.0 + 0.4 * -2.0);
  EXPECT_THROW(forecast_one(hand, std::vector<double>{1.0}, residuals), ValidationError);
}

TEST(SelectOrder, StrongArPicksAutoregression) {
  const auto y = ar1(0.8, 400, 77);
  EXPECT_GE(select_order(y, 3, 3).p, 1u);
}

// AIC charges 2 per parameter, so each spurious order beats (0, 0) with
// probability about P(chi2_1 > 2) = 0.16 and together they win roughly half
// the time; (0, 0) must still be the most frequent choice by far.
TEST(SelectOrder, WhiteNoiseMostOftenPicksZero) {
  std::map<std::pair<std::size_t, std::size_t>, int> picks;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto o = select_order(white_noise(200, 500 + seed));
    ++picks[{o.p, o.q}];
  }
  const int zero = picks[{0, 0}];
  EXPECT_GE(zero, 40);
  for (const auto& [order, count] : picks) {
    if (order != std::pair<std::size_t, std::size_t>{0, 0}) {
      EXPECT_LT(count, zero / 3);
    }
  }
}

TEST(SelectOrder, ConstantSeriesIsImmediate) {
  const std::vector<double> zeros(120, 0.0);
  EXPECT_EQ(select_order(zeros), (ArmaOrder{0, 0}));
  const auto m = fit_arma(zeros, 2, 2);
  EXPECT_EQ(m.sigma2, 0.0);
  EXPECT_EQ(m.c, 0.0);
}

TEST(SelectOrder, TiesGoToTheSmallerOrder) {
  const std::vector<OrderScore> scores = {
      {{2, 0}, 10.0}, {{0, 2}, 10.0}, {{1, 0}, 10.0}, {{0, 1}, 10.0}, {{3, 3}, 11.0}};
  EXPECT_EQ(best_order(scores), (ArmaOrder{0, 1}));
  const std::vector<OrderScore> better = {{{2, 2}, 9.0}, {{0, 0}, 10.0}};
  EXPECT_EQ(best_order(better), (ArmaOrder{2, 2}));
}

TEST(ArmaStepper, SlidesOverTrueObservations) {
  const auto y = ar1(0.6, 300, 3, 1.0);
  const std::span<const double> train(y.data(), 200);
  const auto m = fit_arma(train, 1, 1);
  ArmaStepper stepper(m, train);
  std::vector<double> residuals = innovations(m, y, m.conditioning);
  for (std::size_t t = 200; t < 300; ++t) {
    const double expected = forecast_one(m, std::span<const double>(y.data(), t),
                                         std::span<const double>(residuals.data(), t));
    EXPECT_NEAR(stepper.predict(), expected, 1e-9);
    stepper.observe(y[t]);
  }
}

// ---- rolling forecasts ----

TEST(RollingForecast, ProfileSeriesForecastsExactly) {
  harness::SeasonalArOptions opts;
  opts.weeks = 2;
  auto f = harness::seasonal_ar_fixture(1, opts);
  const auto profile = ts::seasonal_profile(f.series);
  const auto flat = ts::add_seasonality(
      RoiTimeSeries(0, std::vector<double>(f.series.size(), 0.0), f.series.epochs, SeriesRole::kDeseasonalized),
      profile);
  const auto r = rolling_forecast(flat, profile, 9, {});
  ASSERT_EQ(r.predicted.size(), kHoursPerDay);
  for (std::size_t i = 0; i < kHoursPerDay; ++i) {
    EXPECT_NEAR(r.predicted.values[i], r.actual.values[i], 1e-9);
  }
  EXPECT_NEAR(r.errors.mean_absolute(), 0.0, 1e-9);
}

TEST(RollingForecast, SeasonalBeatsBaselineAndShapes) {
  const auto f = harness::seasonal_ar_fixture(2, {});
  const auto profile = ts::seasonal_profile(f.series);
  RollingOptions with;
  RollingOptions without;
  without.deseasonalize = false;
  double seasonal = 0.0;
  double baseline = 0.0;
  for (std::size_t day : {10u, 17u}) {
    const auto a = rolling_forecast(f.series, profile, day, with);
    const auto b = rolling_forecast(f.series, profile, day, without);
    ASSERT_EQ(a.predicted.size(), kHoursPerDay);
    EXPECT_EQ(a.actual.values[0], f.series.values[day * kHoursPerDay]);
    for (double v : a.predicted.values) EXPECT_TRUE(std::isfinite(v));
    EXPECT_EQ(a.predicted.role, SeriesRole::kForecast);
    seasonal += a.errors.mean_absolute();
    baseline += b.errors.mean_absolute();
  }
  EXPECT_LT(seasonal, baseline);
}

TEST(RollingForecast, Preconditions) {
  const auto f = harness::seasonal_ar_fixture(2, {});
  const auto profile = ts::seasonal_profile(f.series);
  EXPECT_THROW(rolling_forecast(f.series, profile, 4, {}), ValidationError);
  EXPECT_THROW(rolling_forecast(f.series, profile, 28, {}), ValidationError);
}

// ---- anomalies ----

TEST(DetectAnomalies, Examples) {
  EXPECT_TRUE(detect_anomalies(std::vector<double>(50, 1.5), 1.5, 2.0).empty());

  std::vector<double> e(50, 0.0);
  e[17] = 3.5 * 2.0;
  const auto events = detect_anomalies(e, 0.0, 2.0, {4, Direction::kIn, 100});
  ASSERT_EQ(events.size(), 1u);
  EXPECT_EQ(events[0].side, ThresholdSide::kUpper);
  EXPECT_EQ(events[0].epoch_index, 117u);
  EXPECT_EQ(events[0].roi_id, 4);
  EXPECT_DOUBLE_EQ(events[0].lambda1, 6.0);
  EXPECT_DOUBLE_EQ(events[0].lambda2, -6.0);
  EXPECT_DOUBLE_EQ(events[0].magnitude, 1.0);

  const std::vector<double> low{-7.0};
  EXPECT_EQ(detect_anomalies(low, 0.0, 2.0)[0].side, ThresholdSide::kLower);

  const std::vector<double> degenerate{0.0, 0.1, -0.1};
  EXPECT_EQ(detect_anomalies(degenerate, 0.0, 0.0).size(), 2u);
}

TEST(DetectAnomalies, NormalResidualRate) {
  const auto e = white_noise(10000, 8);
  const double rate = static_cast<double>(detect_anomalies(e, 0.0, 1.0).size()) / 1e4;
  EXPECT_NEAR(rate, 0.0027, 0.002);
}

TEST(DetectAnomalies, ShiftInvariance) {
  const auto e = white_noise(2000, 10);
  std::vector<double> shifted(e);
  for (auto& x : shifted) x += 12.5;
  const auto a = detect_anomalies(e, 0.1, 0.9);
  const auto b = detect_anomalies(shifted, 12.6, 0.9);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].epoch_index, b[i].epoch_index);
    EXPECT_EQ(a[i].side, b[i].side);
    EXPECT_NEAR(a[i].magnitude, b[i].magnitude, 1e-9);
  }
}

std::vector<AnomalyEvent> synthetic_events(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> mag(0, 40);
  std::vector<AnomalyEvent> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].epoch_index = n - i;
    out[i].roi_id = static_cast<std::int64_t>(i % 3);
    out[i].magnitude = mag(rng) / 4.0;
  }
  return out;
}

TEST(RankAnomalies, KeepsCeilingOfTenPercent) {
  EXPECT_EQ(rank_anomalies(synthetic_events(896, 1)).size(), 90u);
  EXPECT_EQ(rank_anomalies(synthetic_events(366, 2)).size(), 37u);
  EXPECT_TRUE(rank_anomalies({}).empty());
  EXPECT_EQ(keep_count(10, 0.1), 1u);
  EXPECT_EQ(keep_count(1000, 0.07), 70u);
}

TEST(RankAnomalies, PrefixOfTheFullOrdering) {
  const auto events = synthetic_events(500, 3);
  const auto full = rank_anomalies(events, 1.0);
  const auto top = rank_anomalies(events, 0.1);
  ASSERT_EQ(full.size(), 500u);
  for (std::size_t i = 0; i < top.size(); ++i) {
    EXPECT_EQ(top[i].epoch_index, full[i].epoch_index);
    EXPECT_EQ(top[i].roi_id, full[i].roi_id);
  }
  for (std::size_t i = 1; i < full.size(); ++i) {
    ASSERT_GE(full[i - 1].magnitude, full[i].magnitude);
    if (full[i - 1].magnitude == full[i].magnitude) {
      EXPECT_LE(full[i - 1].epoch_index, full[i].epoch_index);
    }
  }
}

TEST(ScanAnomalies, FindsAnInjectedSpike) {
  auto f = harness::seasonal_ar_fixture(4, {});
  const std::size_t spike = 2 * kHoursPerWeek + 30;
  f.series.values[spike] += 80.0;
  const auto scan = scan_anomalies(f.series, ts::seasonal_profile(f.series), {}, Direction::kOut);
  EXPECT_EQ(scan.first_test_epoch, kHoursPerWeek);
  EXPECT_EQ(scan.residuals.size(), 3 * kHoursPerWeek);
  EXPECT_GT(scan.sigma, 0.0);
  const auto hit = std::find_if(scan.events.begin(), scan.events.end(),
                                [&](const AnomalyEvent& e) { return e.epoch_index == spike; });
  ASSERT_NE(hit, scan.events.end());
  EXPECT_EQ(hit->direction, Direction::kOut);
  EXPECT_EQ(hit->side, ThresholdSide::kUpper);
}

// ---- Spearman and correlated ROIs ----

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

// Ranks by brute force: 1 + #smaller + (#equal - 1) / 2.
std::vector<double> brute_ranks(const std::vector<double>& v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double smaller = 0, equal = 0;
    for (double w : v) {
      smaller += w < v[i];
      equal += w == v[i];
    }
    r[i] = 1.0 + smaller + (equal - 1.0) / 2.0;
  }
  return r;
}

TEST(Spearman, Examples) {
  std::vector<double> x{3.0, 1.0, 4.0, 1.5, 9.0, 2.6};
  EXPECT_DOUBLE_EQ(*spearman(x, x), 1.0);
  std::vector<double> rev(x);
  std::sort(rev.begin(), rev.end(), std::greater<>());
  std::vector<double> inc(x);
  std::sort(inc.begin(), inc.end());
  EXPECT_DOUBLE_EQ(*spearman(inc, rev), -1.0);
  EXPECT_FALSE(spearman(x, std::vector<double>(6, 2.0)).has_value());
  EXPECT_THROW(spearman(std::vector<double>{1.0, 2.0}, std::vector<double>{1.0, 2.0}), ValidationError);
}

TEST(Spearman, MatchesRankPearsonOracle) {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_int_distribution<int> coarse(0, 9);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x(50), y(50);
    for (std::size_t i = 0; i < 50; ++i) {
      // Every other trial uses coarse values so ties occur.
      x[i] = trial % 2 ? coarse(rng) : n(rng);
      y[i] = trial % 2 ? coarse(rng) + 0.5 * x[i] : n(rng) + 0.3 * x[i];
    }
    EXPECT_NEAR(*spearman(x, y), pearson(brute_ranks(x), brute_ranks(y)), 1e-12);
    EXPECT_EQ(average_ranks(x), brute_ranks(x));
  }
}

TEST(Spearman, InvariantUnderMonotoneTransforms) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> x(80), y(80);
  for (std::size_t i = 0; i < 80; ++i) {
    x[i] = n(rng);
    y[i] = x[i] + n(rng);
  }
  std::vector<double> ex(x), cy(y);
  for (auto& v : ex) v = std::exp(v);
  for (auto& v : cy) v = v * v * v + 4.0;
  EXPECT_DOUBLE_EQ(*spearman(x, y), *spearman(ex, cy));
}

EpochSpec hours(std::size_t n) { return EpochSpec{0, kSecondsPerHour, n}; }

TEST(CorrelatedRois, ShiftedCandidateFoundAtLagOne) {
  const auto base = white_noise(201, 4);
  // Candidate leads: target[t] = candidate[t - 1].
  const RoiTimeSeries target(0, std::vector<double>(base.begin(), base.end() - 1), hours(200));
  const RoiTimeSeries lead(7, std::vector<double>(base.begin() + 1, base.end()), hours(200));
  const auto r = correlated_rois(target, std::vector<RoiTimeSeries>{lead}, 1, 10);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].lag, 1);
  EXPECT_DOUBLE_EQ(r[0].rho, 1.0);
  EXPECT_EQ(r[0].candidate_roi, 7);
  EXPECT_EQ(r[0].target_roi, 0);
}

TEST(CorrelatedRois, MatchesExhaustiveScoringAndSerial) {
  const RoiTimeSeries target(0, white_noise(300, 50), hours(300));
  std::vector<RoiTimeSeries> candidates;
  for (std::int64_t id = 1; id <= 25; ++id) {
    auto v = white_noise(300, 50 + static_cast<std::uint64_t>(id));
    for (std::size_t t = 1; t < v.size(); ++t) v[t] += 0.04 * static_cast<double>(id % 6) * target.values[t - 1];
    candidates.emplace_back(id, v, hours(300));
  }
  const auto r = correlated_rois(target, candidates, 1, 5);
  ASSERT_EQ(r.size(), 5u);

  std::vector<CorrelationResult> oracle;
  for (const auto& c : candidates) {
    CorrelationResult best{0, c.roi_id, 0, 0.0};
    bool first = true;
    for (int lag : {0, -1, 1}) {
      const double rho = *lagged_spearman(target.values, c.values, lag);
      if (first || std::abs(rho) > std::abs(best.rho)) best = {0, c.roi_id, lag, rho};
      first = false;
    }
    oracle.push_back(best);
  }
  std::stable_sort(oracle.begin(), oracle.end(),
                   [](const auto& a, const auto& b) { return std::abs(a.rho) > std::abs(b.rho); });
  for (std::size_t i = 0; i < r.size(); ++i) {
    EXPECT_EQ(r[i].candidate_roi, oracle[i].candidate_roi);
    EXPECT_EQ(r[i].lag, oracle[i].lag);
    EXPECT_EQ(r[i].rho, oracle[i].rho);
    EXPECT_LE(std::abs(r[i].rho), 1.0);
  }
  const auto serial = correlated_rois_serial(target, candidates, 1, 5);
  ASSERT_EQ(serial.size(), r.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    EXPECT_EQ(serial[i].candidate_roi, r[i].candidate_roi);
    EXPECT_EQ(serial[i].rho, r[i].rho);
  }
  // Independent noise shows only weak correlation.
  EXPECT_LT(std::abs(r.back().rho), 0.3);
}

TEST(CorrelatedRois, TopKLargerThanCandidates) {
  const RoiTimeSeries target(0, white_noise(100, 1), hours(100));
  std::vector<RoiTimeSeries> candidates = {RoiTimeSeries(1, white_noise(100, 2), hours(100)),
                                           RoiTimeSeries(0, white_noise(100, 3), hours(100)),
                                           RoiTimeSeries(2, white_noise(100, 4), hours(100))};
  EXPECT_EQ(correlated_rois(target, candidates, 1, 10).size(), 2u);  // own roi skipped
}

// ---- VAR ----

TEST(FitVar, ConstructedLinearDependence) {
  const auto a = white_noise(500, 6);
  std::vector<double> b(500, 0.0);
  for (std::size_t t = 1; t < b.size(); ++t) b[t] = a[t - 1];
  const std::vector<std::vector<double>> series = {a, b};
  const auto m = fit_var(series, 1);
  EXPECT_NEAR(m.A[0](1, 0), 1.0, 1e-9);
  EXPECT_NEAR(m.A[0](1, 1), 0.0, 1e-9);
  EXPECT_NEAR(m.A[0](0, 0), 0.0, 0.15);
  EXPECT_NEAR(m.A[0](0, 1), 0.0, 0.15);
  EXPECT_EQ(m.residual_cov.rows(), 2);
  EXPECT_NEAR(m.residual_cov(0, 1), m.residual_cov(1, 0), 1e-12);
}

TEST(FitVar, WhiteNoiseHasSmallCoefficients) {
  const std::vector<std::vector<double>> series = {white_noise(2000, 1), white_noise(2000, 2), white_noise(2000, 3)};
  const auto m = fit_var(series, 2);
  for (const auto& A : m.A) EXPECT_LT(A.cwiseAbs().maxCoeff(), 0.1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m.residual_cov);
  EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-8);
}

TEST(FitVar, Preconditions) {
  const std::vector<std::vector<double>> one = {white_noise(100, 1)};
  EXPECT_THROW(fit_var(one, 1), ValidationError);
  const std::vector<std::vector<double>> short_series = {white_noise(29, 1), white_noise(29, 2)};
  EXPECT_THROW(fit_var(short_series, 1), ValidationError);
  const auto a = white_noise(100, 1);
  std::vector<double> twice(a);
  for (auto& v : twice) v *= 2.0;
  try {
    fit_var(std::vector<std::vector<double>>{a, twice}, 1);
    FAIL() << "collinear design accepted";
  } catch (const ValidationError& e) {
    EXPECT_STREQ(e.what(), "collinear inputs");
  }
}

TEST(ForecastVar, Examples) {
  VarModel m;
  m.k = 2;
  m.p = 1;
  m.c = Eigen::VectorXd::Zero(2);
  m.A = {Eigen::MatrixXd::Zero(2, 2)};
  EXPECT_TRUE(forecast_var(m, Eigen::MatrixXd::Zero(2, 1)).isZero());

  m.A[0] = Eigen::MatrixXd::Identity(2, 2);
  Eigen::MatrixXd history(2, 3);
  history << 1, 2, 3, 4, 5, 6;
  EXPECT_EQ(forecast_var(m, history), Eigen::Vector2d(3, 6));

  VarModel r;
  r.k = 2;
  r.p = 2;
  r.c = Eigen::Vector2d(0.5, -1.0);
  Eigen::MatrixXd a1(2, 2), a2(2, 2);
  a1 << 0.2, -0.1, 0.3, 0.4;
  a2 << 0.05, 0.0, -0.2, 0.1;
  r.A = {a1, a2};
  Eigen::MatrixXd h(2, 2);
  h << 1.0, 2.0, -1.0, 3.0;  // columns: y_{t-2}, y_{t-1}
  const Eigen::Vector2d expected(0.5 + 0.2 * 2.0 - 0.1 * 3.0 + 0.05 * 1.0,
                                 -1.0 + 0.3 * 2.0 + 0.4 * 3.0 - 0.2 * 1.0 + 0.1 * -1.0);
  EXPECT_TRUE(forecast_var(r, h).isApprox(expected, 1e-12));
  EXPECT_THROW(forecast_var(r, Eigen::MatrixXd::Zero(2, 1)), ValidationError);
}

// ---- enhancement ----

TEST(EnhancedForecast, LeadingHelperImproves) {
  const std::vector<std::size_t> days = {16, 23};
  const auto f = harness::lead_lag_fixture(3, days);
  const auto profile = ts::seasonal_profile(f.target);
  const std::vector<RoiTimeSeries> helpers = {ts::deseasonalize(f.helper, ts::seasonal_profile(f.helper))};
  for (auto day : days) {
    const auto e = enhanced_forecast(f.target, helpers, profile, day);
    EXPECT_FALSE(e.fell_back);
    EXPECT_GT(e.improvement, 0.0);
    EXPECT_NEAR(e.improvement, 1.0 - e.errors.mean_absolute() / e.local_errors.mean_absolute(), 1e-12);
    ASSERT_TRUE(e.model.has_value());
    EXPECT_EQ(e.model->k, 2u);
  }
}

TEST(EnhancedForecast, PureNoiseHelpersGiveNoGain) {
  double sum = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto f = harness::seasonal_ar_fixture(100 + seed, {});
    std::vector<RoiTimeSeries> helpers;
    for (std::uint64_t h = 0; h < 2; ++h) {
      helpers.emplace_back(1 + static_cast<std::int64_t>(h), white_noise(f.series.size(), 900 + 10 * seed + h),
                           f.series.epochs, SeriesRole::kDeseasonalized);
    }
    sum += enhanced_forecast(f.series, helpers, ts::seasonal_profile(f.series), 20).improvement;
  }
  EXPECT_NEAR(sum / 20.0, 0.0, 0.10);
}

TEST(EnhancedForecast, FallsBackWithoutHelpers) {
  const auto f = harness::seasonal_ar_fixture(5, {});
  const auto e = enhanced_forecast(f.series, {}, ts::seasonal_profile(f.series), 15);
  EXPECT_TRUE(e.fell_back);
  EXPECT_EQ(e.improvement, 0.0);
  EXPECT_EQ(e.predicted.values, e.local.values);
}

}  // namespace
}  // namespace mobagg::forecast
