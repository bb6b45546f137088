// Acceptance run: one PASS/FAIL line per criterion. The exit status is 0 when
// the failing criteria are exactly those named with --expect-red (none by
// default), so a known shortfall stays visible without hiding new ones.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mobagg/forecast/anomaly.h"
#include "mobagg/forecast/arma.h"
#include "mobagg/forecast/correlation.h"
#include "mobagg/forecast/enhance.h"
#include "mobagg/forecast/rolling.h"
#include "mobagg/forecast/var.h"
#include "mobagg/harness/fixtures.h"
#include "mobagg/harness/pipeline.h"
#include "mobagg/harness/sim.h"
#include "mobagg/privagg/protocol.h"
#include "mobagg/sketch/count_min.h"
#include "mobagg/timeseries/seasonal.h"

namespace {

using namespace mobagg;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

std::vector<std::uint32_t> random_words(std::size_t n, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::uint32_t> any;
  std::vector<std::uint32_t> v(n);
  for (auto& x : v) x = any(rng);
  return v;
}

// ---- 1 and 2: protocol exactness and mask cancellation ----

struct ProtocolTrials {
  std::size_t trials = 0;
  std::size_t exact_full = 0;
  std::size_t exact_recovered = 0;
  std::size_t cancelled = 0;
  double seconds = 0.0;
};

ProtocolTrials run_protocol_trials() {
  using namespace mobagg::privagg;
  const std::size_t lengths[] = {1, 7, 64, 1164, 2048};
  std::mt19937_64 rng(20100301);
  std::uniform_int_distribution<std::size_t> group_size(2, 50);
  ProtocolTrials out;
  const auto t0 = Clock::now();
  for (std::size_t trial = 0; trial < 200; ++trial) {
    const std::size_t n = group_size(rng);
    const std::size_t T = lengths[trial % 5];
    std::vector<UserId> ids(n);
    std::vector<KeyPair> keys(n);
    std::vector<PublicKey> pub(n);
    std::uniform_int_distribution<UserId> id_gap(1, 1000);
    UserId next = id_gap(rng);
    for (std::size_t i = 0; i < n; ++i) {
      ids[i] = next;
      next += id_gap(rng);
      keys[i] = keygen(trial, ids[i]);
      pub[i] = keys[i].y;
    }
    const GroupView group(trial, ids, pub, T);

    std::vector<std::vector<std::uint32_t>> inputs(n);
    std::vector<CiphertextVector> cts;
    std::vector<std::uint32_t> plain(T, 0);
    std::vector<std::uint32_t> mask_sum(T, 0);
    for (std::size_t i = 0; i < n; ++i) {
      inputs[i] = random_words(T, rng);
      const auto k = blinding_factors(keys[i], ids[i], group);
      add_into_serial(mask_sum, k);
      add_into_serial(plain, inputs[i]);
      cts.push_back(encrypt(inputs[i], k, ids[i], trial));
    }
    out.cancelled += std::all_of(mask_sum.begin(), mask_sum.end(), [](std::uint32_t v) { return v == 0; });
    const auto full = aggregate(cts, group);
    out.exact_full += !full.requires_recovery() && full.entries == plain;

    // Random dropouts, at least one member left online.
    std::uniform_int_distribution<std::size_t> dropped_count(1, n - 1);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    order.resize(n - dropped_count(rng));
    std::set<UserId> online;
    std::vector<CiphertextVector> partial;
    std::vector<std::uint32_t> online_plain(T, 0);
    for (auto i : order) {
      online.insert(ids[i]);
      partial.push_back(cts[i]);
      add_into_serial(online_plain, inputs[i]);
    }
    std::vector<RecoveryShare> shares;
    for (auto i : order) shares.push_back(recovery_share(keys[i], ids[i], group, online));
    out.exact_recovered += aggregate(partial, group).requires_recovery() &&
                           recover_aggregate(partial, shares, group) == online_plain;
    ++out.trials;
  }
  out.seconds = seconds_since(t0);
  return out;
}

Outcome criterion1(const ProtocolTrials& t) {
  const bool pass = t.exact_full == t.trials && t.exact_recovered == t.trials && t.seconds < 60.0;
  return {pass, fmt("%zu/%zu full aggregates exact, %zu/%zu recoveries exact, %.1f s (limit 60 s)", t.exact_full,
                    t.trials, t.exact_recovered, t.trials, t.seconds)};
}

Outcome criterion2(const ProtocolTrials& t) {
  return {t.cancelled == t.trials, fmt("%zu/%zu trials with every mask sum zero mod 2^32", t.cancelled, t.trials)};
}

// ---- 3: sketch sizing ----

Outcome criterion3() {
  const auto a = sketch::make_params(10000, 0.01, 0.01);
  const auto b = sketch::make_params(1000000, 0.01, 0.01);
  const bool pass = a.d == 14 && a.w == 272 && a.size() == 3808 && b.d == 19 && b.w == 272 && b.size() == 5168;
  return {pass, fmt("|S|=1e4 -> (%u, %u) L=%zu; |S|=1e6 -> (%u, %u) L=%zu", a.d, a.w, a.size(), b.d, b.w, b.size())};
}

// ---- 4: sketch error bound ----

Outcome criterion4() {
  const double eps = 0.01;
  const double delta = 0.01;
  const std::uint64_t keys = 2000;
  const auto params = sketch::make_params(keys, eps, delta);
  std::mt19937_64 rng(4);
  // Skewed streams: key k drawn with weight 1 / (k + 1).
  std::vector<double> weights(keys);
  for (std::uint64_t k = 0; k < keys; ++k) weights[k] = 1.0 / static_cast<double>(k + 1);
  std::discrete_distribution<std::uint64_t> skewed(weights.begin(), weights.end());
  std::uniform_int_distribution<std::uint64_t> uniform_key(0, keys - 1);
  const int trials = 1000;
  int violations = 0;
  std::size_t under = 0;
  std::size_t checked = 0;
  for (int trial = 0; trial < trials; ++trial) {
    sketch::CountMinSketch s(params, sketch::make_seeds(params.d, 100000 + trial));
    std::vector<std::uint64_t> exact(keys, 0);
    double l1 = 0.0;
    for (int i = 0; i < 5000; ++i) {
      const auto k = trial % 2 ? skewed(rng) : uniform_key(rng);
      s.update(k);
      ++exact[k];
      l1 += 1.0;
    }
    const auto probe = uniform_key(rng);
    violations += static_cast<double>(s.estimate(probe)) > static_cast<double>(exact[probe]) + eps * l1;
    const auto est = s.estimate_all();
    for (std::uint64_t k = 0; k < keys; ++k) under += est[k] < exact[k];
    checked += keys;
  }
  const double rate = static_cast<double>(violations) / trials;
  return {rate < delta && under == 0, fmt("bound violated in %d/%d streams (rate %.4f, delta %.2f); %zu of %zu "
                                          "estimates below the true count", violations, trials, rate, delta, under,
                                          checked)};
}

// ---- 5: message sizing ----

Outcome criterion5() {
  using namespace mobagg::harness;
  SimConfig station;
  station.n_users = 40;
  station.group_size = 20;
  station.threshold = 2;
  station.n_stations = 582;
  SimConfig grid = station;
  grid.n_users = 20;
  grid.group_size = 10;
  grid.mode = VectorMode::kGrid;
  grid.grid_side = 100;

  std::vector<std::size_t> payloads;
  bool framed = true;
  for (const auto& c : {station, grid}) {
    Population pop(c.n_users, 5);
    std::vector<std::vector<std::uint32_t>> inputs(c.n_users, std::vector<std::uint32_t>(c.input_length(), 0));
    const auto out = simulate_round(c, pop, 0, inputs);
    const auto& g = out.report.groups.at(0);
    payloads.push_back(g.payload_bytes);
    // Everyone is online, so the round's uploads are exactly one framed
    // ciphertext per user: two 4-byte prefixes, the JSON header, the words.
    std::size_t expected = 0;
    for (UserId id = 0; id < c.n_users; ++id) {
      const auto header = nlohmann::json{{"user_id", id}, {"round_id", 0}}.dump();
      expected += 2 * 4 + header.size() + 4 * c.vector_length();
    }
    std::size_t uploaded = 0;
    for (const auto& group : out.report.groups) uploaded += group.upload_bytes;
    framed &= uploaded == expected;
  }
  const bool pass = payloads[0] == 4656 && payloads[1] == 40000 && framed;
  return {pass, fmt("station payload %zu B (%.2f KiB, %.2f KB); grid payload %zu B (%.2f KiB, %.2f KB); framed "
                    "upload totals %s", payloads[0], payloads[0] / 1024.0, payloads[0] / 1000.0, payloads[1],
                    payloads[1] / 1024.0, payloads[1] / 1000.0, framed ? "exact" : "WRONG")};
}

// ---- 6: seasonal forecaster against the black-box baseline ----

Outcome criterion6() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  double seasonal_total = 0.0;
  double baseline_total = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto f = harness::seasonal_ar_fixture(seed);
    const auto profile = ts::seasonal_profile(f.series);
    double seasonal = 0.0;
    double baseline = 0.0;
    for (std::size_t day : {8, 16, 24, 27}) {
      forecast::RollingOptions with;
      forecast::RollingOptions without;
      without.deseasonalize = false;
      seasonal += forecast::rolling_forecast(f.series, profile, day, with).errors.mean_absolute();
      baseline += forecast::rolling_forecast(f.series, profile, day, without).errors.mean_absolute();
    }
    worst = std::max(worst, seasonal / baseline);
    seasonal_total += seasonal;
    baseline_total += baseline;
  }
  const double secs = seconds_since(t0);
  const double ratio = seasonal_total / baseline_total;
  return {worst <= 0.5 && secs < 120.0, fmt("MAE ratio seasonal/baseline %.3f overall, worst seed %.3f (limit 0.5); "
                                            "%.1f s (limit 120 s)", ratio, worst, secs)};
}

// ---- 7: anomaly detection ----

Outcome criterion7() {
  std::size_t detected = 0;
  std::size_t injected = 0;
  std::size_t flagged = 0;
  std::size_t slots = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    harness::SeasonalArOptions options;
    auto f = harness::seasonal_ar_fixture(seed, options);
    std::mt19937_64 rng(seed * 7919);
    const auto spikes = harness::inject_spikes(f.series, kHoursPerWeek, f.series.size(), 8,
                                               6.0 * options.innovation_sd, rng);
    const auto scan = forecast::scan_anomalies(f.series, ts::seasonal_profile(f.series), {});
    for (auto s : spikes) {
      detected += std::any_of(scan.events.begin(), scan.events.end(),
                              [&](const forecast::AnomalyEvent& e) { return e.epoch_index == s; });
    }
    injected += spikes.size();
    flagged += scan.events.size();
    slots += scan.residuals.size();
  }
  const double recall = static_cast<double>(detected) / static_cast<double>(injected);
  const double fraction = static_cast<double>(flagged) / static_cast<double>(slots);
  return {recall >= 0.9 && fraction <= 0.02, fmt("recall %.3f (min 0.9); flagged %zu of %zu test slots = %.2f%% "
                                                 "(max 2%%)", recall, flagged, slots, 100.0 * fraction)};
}

// ---- 8: correlation-enhanced forecasts ----

Outcome criterion8() {
  double total = 0.0;
  double worst = 1.0;
  const std::vector<std::size_t> days{22};
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto f = harness::lead_lag_fixture(seed, days);
    const auto target_profile = ts::seasonal_profile(f.target);
    const std::vector<RoiTimeSeries> helpers{ts::deseasonalize(f.helper, ts::seasonal_profile(f.helper))};
    const auto r = forecast::enhanced_forecast(f.target, helpers, target_profile, days[0]);
    total += r.improvement;
    worst = std::min(worst, r.improvement);
  }
  const double mean = total / 10.0;
  return {mean >= 0.15, fmt("mean anomaly-day MAE improvement %.1f%% over local ARMA (min 15%%), worst seed %.1f%%",
                            100.0 * mean, 100.0 * worst)};
}

// ---- 9: sketches through the protocol ----

bool sketches_aggregate_to_merge() {
  using namespace mobagg::privagg;
  const auto params = sketch::make_params(1164, 0.01, 0.01);
  std::mt19937_64 rng(9);
  std::bernoulli_distribution present(0.05);
  bool all = true;
  for (RoundId round = 0; round < 5; ++round) {
    const auto seeds = sketch::make_seeds(params.d, 1000 + round);
    const std::size_t n = 8;
    std::vector<UserId> ids(n);
    std::iota(ids.begin(), ids.end(), 1);
    std::vector<KeyPair> keys;
    std::vector<PublicKey> pub;
    for (auto id : ids) {
      keys.push_back(keygen(round, id));
      pub.push_back(keys.back().y);
    }
    const GroupView group(round, ids, pub, params.size(), 1000 + round);
    std::vector<sketch::CountMinSketch> sketches;
    std::vector<CiphertextVector> cts;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::uint32_t> v(1164);
      for (auto& x : v) x = present(rng);
      sketches.push_back(sketch::encode_vector(v, params, seeds));
      cts.push_back(encrypt(sketches.back().counters(), blinding_factors(keys[i], ids[i], group), ids[i], round));
    }
    auto merged = sketches[0];
    for (std::size_t i = 1; i < n; ++i) merged = sketch::merge(merged, sketches[i]);
    const auto full = aggregate(cts, group).entries;
    all &= std::equal(full.begin(), full.end(), merged.counters().begin(), merged.counters().end());

    // Two members drop out; the recovered sum is the merge of the rest.
    const std::set<UserId> online(ids.begin() + 2, ids.end());
    const std::vector<CiphertextVector> partial(cts.begin() + 2, cts.end());
    std::vector<RecoveryShare> shares;
    for (std::size_t i = 2; i < n; ++i) shares.push_back(recovery_share(keys[i], ids[i], group, online));
    auto rest = sketches[2];
    for (std::size_t i = 3; i < n; ++i) rest = sketch::merge(rest, sketches[i]);
    const auto recovered = recover_aggregate(partial, shares, group);
    all &= std::equal(recovered.begin(), recovered.end(), rest.counters().begin(), rest.counters().end());
  }
  return all;
}

// 150 stations over two weeks, 64 users per round. Three stations carry
// commuter traffic and the rest are nearly idle. With 300 keys and w = 272
// every sketch row has collisions, so decoded counts really are inflated.
harness::PipelineSource criterion9_source(std::uint64_t seed) {
  harness::SeasonalArOptions busy;
  busy.weeks = 2;
  busy.scale = 0.1;
  busy.base_level = 6;
  busy.innovation_sd = 1.5;
  harness::SeasonalArOptions idle = busy;
  idle.scale = 0.01;
  idle.base_level = 1;
  idle.innovation_sd = 0.7;
  std::vector<RoiTimeSeries> in;
  std::vector<RoiTimeSeries> out;
  for (std::int64_t s = 0; s < 150; ++s) {
    const auto& o = s < 3 ? busy : idle;
    const auto base = seed * 1000 + 2 * static_cast<std::uint64_t>(s);
    in.push_back(harness::seasonal_ar_fixture(base, o, s).series);
    out.push_back(harness::seasonal_ar_fixture(base + 1, o, s).series);
  }
  return harness::PipelineSource::stations(std::move(in), std::move(out));
}

Outcome criterion9() {
  const bool exact = sketches_aggregate_to_merge();
  double worst = 0.0;
  std::string per_seed;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto source = criterion9_source(seed);
    harness::SimConfig config;
    config.n_users = 64;
    config.group_size = 2;
    config.threshold = 2;
    config.seed = seed;
    harness::AnalysisOptions analysis;
    analysis.enhance.train_days = 7;
    analysis.rois = {0, 1, 2};
    config.mode = harness::VectorMode::kStation;
    const auto raw = harness::run_pipeline(config, source, analysis).report.summary.seasonal_mae;
    config.mode = harness::VectorMode::kSketch;
    const auto sketched = harness::run_pipeline(config, source, analysis).report.summary.seasonal_mae;
    const double rel = std::abs(sketched - raw) / raw;
    worst = std::max(worst, rel);
    per_seed += fmt("%s%.3f vs %.3f", per_seed.empty() ? "" : ", ", sketched, raw);
  }
  return {exact && worst < 0.05, fmt("encrypted sketches %s their merge; forecast MAE sketch vs raw %s, worst "
                                     "relative gap %.2f%% (max 5%%)", exact ? "equal" : "DIFFER from",
                                     per_seed.c_str(), 100.0 * worst)};
}

// ---- 10: estimator sanity ----

Outcome criterion10() {
  double worst_phi = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> eps(0.0, 1.0);
    std::vector<double> y(2000);
    double prev = 0.0;
    for (auto& v : y) v = prev = 0.7 * prev + eps(rng);
    worst_phi = std::max(worst_phi, std::abs(forecast::fit_arma(y, 1, 0).phi[0] - 0.7));
  }

  // Rank-Pearson oracle, ties averaged, written out independently.
  double worst_rho = 0.0;
  std::mt19937_64 rng(10);
  std::uniform_int_distribution<int> small(0, 20);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const auto ranks = [](const std::vector<double>& v) {
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      double less = 0.0;
      double equal = 0.0;
      for (double w : v) {
        less += w < v[i];
        equal += w == v[i];
      }
      r[i] = less + (equal + 1.0) / 2.0;
    }
    return r;
  };
  const auto pearson = [](const std::vector<double>& a, const std::vector<double>& b) {
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      sab += (a[i] - ma) * (b[i] - mb);
      saa += (a[i] - ma) * (a[i] - ma);
      sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
  };
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x(200);
    std::vector<double> y(200);
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = trial % 2 ? small(rng) : gauss(rng);
      y[i] = 0.5 * x[i] + (trial % 2 ? small(rng) : gauss(rng));
    }
    const auto rho = forecast::spearman(x, y);
    worst_rho = std::max(worst_rho, rho ? std::abs(*rho - pearson(ranks(x), ranks(y))) : 1.0);
  }

  // VAR(1) with a known coefficient matrix.
  Eigen::Matrix2d A;
  A << 0.5, 0.2, -0.3, 0.4;
  std::vector<std::vector<double>> series(2, std::vector<double>(2000));
  Eigen::Vector2d state = Eigen::Vector2d::Zero();
  std::mt19937_64 var_rng(11);
  for (std::size_t t = 0; t < 2000; ++t) {
    state = A * state + Eigen::Vector2d(gauss(var_rng), gauss(var_rng));
    series[0][t] = state(0);
    series[1][t] = state(1);
  }
  const auto var = forecast::fit_var(series, 1);
  const double worst_a = (var.A[0] - A).cwiseAbs().maxCoeff();

  const bool pass = worst_phi <= 0.08 && worst_rho <= 1e-12 && worst_a <= 0.1;
  return {pass, fmt("AR(1) |phi-0.7| max %.4f (max 0.08); Spearman vs rank-Pearson max gap %.1e (max 1e-12); "
                    "VAR(1) max coefficient error %.4f (max 0.1)", worst_phi, worst_rho, worst_a)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  std::vector<int> expect_red;
  std::vector<int> only;
  app.add_option("--expect-red", expect_red, "Criteria known to fail; the run succeeds if exactly these fail");
  app.add_option("--only", only, "Run only these criteria");
  CLI11_PARSE(app, argc, argv);

  ProtocolTrials trials;
  bool have_trials = false;
  const auto protocol = [&]() -> const ProtocolTrials& {
    if (!have_trials) {
      trials = run_protocol_trials();
      have_trials = true;
    }
    return trials;
  };

  const std::map<int, std::function<Outcome()>> criteria{
      {1, [&] { return criterion1(protocol()); }},
      {2, [&] { return criterion2(protocol()); }},
      {3, criterion3},
      {4, criterion4},
      {5, criterion5},
      {6, criterion6},
      {7, criterion7},
      {8, criterion8},
      {9, criterion9},
      {10, criterion10},
  };

  std::set<int> failed;
  for (const auto& [id, run] : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    if (!o.pass) failed.insert(id);
    std::printf("criterion %d: %s - %s\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }

  std::set<int> expected;
  for (int id : expect_red) {
    if (only.empty() || std::find(only.begin(), only.end(), id) != only.end()) expected.insert(id);
  }
  if (failed == expected) return 0;
  for (int id : failed) {
    if (!expected.contains(id)) std::printf("unexpected failure: criterion %d\n", id);
  }
  for (int id : expected) {
    if (!failed.contains(id)) std::printf("criterion %d passed but was expected to fail; update --expect-red\n", id);
  }
  return 1;
}
