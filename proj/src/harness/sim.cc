#include "mobagg/harness/sim.h"

#include <algorithm>
#include <chrono>
#include <exception>
#include <map>
#include <numeric>
#include <ostream>
#include <set>

#include "mobagg/core/csv.h"
#include "mobagg/core/error.h"
#include "mobagg/privagg/wire.h"

namespace mobagg::harness {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::mt19937_64 round_rng(const SimConfig& config, RoundId round, std::uint64_t stream) {
  std::seed_seq seq{config.seed, round, stream};
  return std::mt19937_64(seq);
}

// Frames travel as bytes so the byte counts are those of the real encoding.
template <class Message, class Encode, class Parse>
Message transmit(const Message& m, Encode encode, Parse parse, std::size_t& bytes) {
  const auto frame = encode(m);
  const auto raw = privagg::wire::encode(frame);
  bytes += raw.size();
  return parse(privagg::wire::decode(raw));
}

struct GroupJob {
  std::vector<UserId> members;
  std::set<UserId> online;
};

std::vector<std::uint32_t> client_vector(std::span<const std::uint32_t> input,
                                         const std::optional<sketch::SketchParams>& params,
                                         const std::optional<sketch::HashSeeds>& seeds) {
  if (!params) return {input.begin(), input.end()};
  const auto s = sketch::encode_vector(input, *params, *seeds);
  return {s.counters().begin(), s.counters().end()};
}

}  // namespace

std::string_view to_string(VectorMode mode) {
  switch (mode) {
    case VectorMode::kStation:
      return "station";
    case VectorMode::kGrid:
      return "grid";
    case VectorMode::kOd:
      return "od";
    case VectorMode::kSketch:
      return "sketch";
  }
  return "station";
}

VectorMode vector_mode_from_string(std::string_view text) {
  if (text == "station") return VectorMode::kStation;
  if (text == "grid") return VectorMode::kGrid;
  if (text == "od") return VectorMode::kOd;
  if (text == "sketch") return VectorMode::kSketch;
  throw ValidationError("unknown vector mode \"" + std::string(text) + "\"");
}

void SimConfig::validate() const {
  if (n_users < 1) throw ValidationError("n_users must be at least 1");
  if (group_size < 2) throw ValidationError("group_size must be at least 2");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw ValidationError("dropout_rate must lie in [0, 1)");
  if (epochs < 1) throw ValidationError("epochs must be at least 1");
  if ((mode == VectorMode::kStation || mode == VectorMode::kOd || mode == VectorMode::kSketch) && n_stations < 1) {
    throw ValidationError("n_stations must be at least 1");
  }
  if (mode == VectorMode::kGrid && grid_side < 1) throw ValidationError("grid_side must be at least 1");
  if (mode == VectorMode::kSketch) sketch_params();
}

std::size_t SimConfig::input_length() const {
  switch (mode) {
    case VectorMode::kStation:
    case VectorMode::kSketch:
      return 2 * n_stations;
    case VectorMode::kGrid:
      return grid_side * grid_side;
    case VectorMode::kOd:
      return n_stations * n_stations;
  }
  return 0;
}

std::size_t SimConfig::vector_length() const {
  const auto p = sketch_params();
  return p ? p->size() : input_length();
}

std::optional<sketch::SketchParams> SimConfig::sketch_params() const {
  if (mode != VectorMode::kSketch) return std::nullopt;
  return sketch::make_params(input_length(), sketch_epsilon, sketch_delta);
}

SimConfig sim_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("simulation config must be a JSON object");
  static const std::set<std::string> known = {"n_users",     "group_size",     "threshold",     "dropout_rate",
                                              "mode",        "n_stations",     "grid_side",     "sketch_epsilon",
                                              "sketch_delta", "epochs",        "seed",          "kernel"};
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw ValidationError("unknown simulation config key \"" + key + "\"");
  }
  SimConfig c;
  try {
    c.n_users = j.value("n_users", c.n_users);
    c.group_size = j.value("group_size", c.group_size);
    c.threshold = j.value("threshold", c.threshold);
    c.dropout_rate = j.value("dropout_rate", c.dropout_rate);
    if (j.contains("mode")) c.mode = vector_mode_from_string(j.at("mode").get<std::string>());
    c.n_stations = j.value("n_stations", c.n_stations);
    c.grid_side = j.value("grid_side", c.grid_side);
    c.sketch_epsilon = j.value("sketch_epsilon", c.sketch_epsilon);
    c.sketch_delta = j.value("sketch_delta", c.sketch_delta);
    c.epochs = j.value("epochs", c.epochs);
    c.seed = j.value("seed", c.seed);
    if (j.contains("kernel")) {
      const auto k = j.at("kernel").get<std::string>();
      if (k != "parallel" && k != "serial") throw ValidationError("kernel must be \"parallel\" or \"serial\"");
      c.kernel = k == "serial" ? privagg::Kernel::kSerial : privagg::Kernel::kParallel;
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("bad simulation config: ") + e.what());
  }
  c.validate();
  return c;
}

nlohmann::json to_json(const SimConfig& c) {
  return nlohmann::json{{"n_users", c.n_users},
                        {"group_size", c.group_size},
                        {"threshold", c.threshold},
                        {"dropout_rate", c.dropout_rate},
                        {"mode", to_string(c.mode)},
                        {"n_stations", c.n_stations},
                        {"grid_side", c.grid_side},
                        {"sketch_epsilon", c.sketch_epsilon},
                        {"sketch_delta", c.sketch_delta},
                        {"epochs", c.epochs},
                        {"seed", c.seed},
                        {"kernel", c.kernel == privagg::Kernel::kSerial ? "serial" : "parallel"}};
}

Population::Population(std::size_t n_users, std::uint64_t seed) {
  clients_.reserve(n_users);
  for (UserId id = 0; id < n_users; ++id) clients_.emplace_back(id, privagg::keygen(seed, id));
}

std::vector<UserId> Population::ids() const {
  std::vector<UserId> out(clients_.size());
  std::iota(out.begin(), out.end(), UserId{0});
  return out;
}

std::uint64_t sketch_seed(const SimConfig& config, RoundId round) {
  auto rng = round_rng(config, round, 2);
  return rng();
}

RoundOutput simulate_round(const SimConfig& config, Population& population, RoundId round,
                           std::span<const std::vector<std::uint32_t>> inputs) {
  config.validate();
  const auto start = Clock::now();
  if (population.size() != config.n_users) throw ValidationError("population size differs from n_users");
  if (inputs.size() != config.n_users) throw ValidationError("one input vector per user is required");
  const std::size_t length = config.input_length();
  for (const auto& v : inputs) {
    if (v.size() != length) throw ValidationError("input vector length does not match the vector mode");
  }
  const std::size_t T = config.vector_length();
  const auto params = config.sketch_params();
  std::optional<std::uint64_t> seed;
  std::optional<sketch::HashSeeds> seeds;
  if (params) {
    seed = sketch_seed(config, round);
    seeds = sketch::make_seeds(params->d, *seed);
  }

  auto rng = round_rng(config, round, 1);
  const auto ids = population.ids();
  std::vector<GroupJob> jobs;
  for (auto& members : privagg::assign_groups(ids, config.group_size, config.threshold, rng)) {
    GroupJob job;
    std::bernoulli_distribution drop(config.dropout_rate);
    for (auto m : members) {
      if (!drop(rng)) job.online.insert(m);
    }
    if (job.online.empty()) {
      std::uniform_int_distribution<std::size_t> pick(0, members.size() - 1);
      job.online.insert(members[pick(rng)]);
    }
    job.members = std::move(members);
    jobs.push_back(std::move(job));
  }

  RoundOutput out;
  out.aggregate.assign(T, 0);
  out.report.round_id = round;
  out.report.mode = config.mode;
  out.report.vector_length = T;
  out.report.groups.resize(jobs.size());
  std::vector<std::vector<std::uint32_t>> sums(jobs.size());
  std::vector<std::exception_ptr> failures(jobs.size());

  const auto n_jobs = static_cast<std::ptrdiff_t>(jobs.size());
#pragma omp parallel for schedule(dynamic) if (n_jobs > 1)
  for (std::ptrdiff_t g = 0; g < n_jobs; ++g) {
    const auto gi = static_cast<std::size_t>(g);
    try {
      const auto group_start = Clock::now();
      const GroupJob& job = jobs[gi];
      GroupReport& rep = out.report.groups[gi];
      rep.group = gi;
      rep.members = job.members.size();
      rep.online = job.online.size();

      std::vector<privagg::PublicKey> keys;
      for (auto m : job.members) keys.push_back(population.client(m).public_key());
      const privagg::GroupView announced(round, job.members, keys, T, seed);
      const auto announcement = privagg::wire::encode(privagg::wire::announcement(announced));
      rep.announcement_bytes = announcement.size();
      rep.download_bytes += announcement.size() * job.members.size();
      const auto view = privagg::wire::parse_announcement(privagg::wire::decode(announcement));

      privagg::GroupAggregator aggregator(view);
      std::vector<std::uint32_t> oracle(T, 0);
      for (auto m : job.online) {
        const auto plain = client_vector(inputs[m], params, seeds);
        privagg::add_into_serial(oracle, plain);
        const auto c = population.client(m).encrypt(plain, view, config.kernel);
        std::size_t sent = 0;
        aggregator.submit(transmit(c, privagg::wire::ciphertext, privagg::wire::parse_ciphertext, sent));
        rep.ciphertext_bytes = sent;
        rep.upload_bytes += sent;
      }
      rep.payload_bytes = T * 4;

      if (aggregator.close() == privagg::RoundState::kAwaitingRecovery) {
        rep.recovery = true;
        const auto online = aggregator.online();
        const auto request = privagg::wire::encode(privagg::wire::recovery_request(round, online));
        for (auto m : online) {
          rep.download_bytes += request.size();
          RoundId requested = 0;
          const auto told = privagg::wire::parse_recovery_request(privagg::wire::decode(request), requested);
          if (requested != round) throw ValidationError("recovery request for the wrong round");
          const auto share = population.client(m).recovery_share(view, told, config.kernel);
          std::size_t sent = 0;
          aggregator.submit_share(
              transmit(share, privagg::wire::recovery_share, privagg::wire::parse_recovery_share, sent));
          rep.upload_bytes += sent;
        }
      }
      sums[gi] = aggregator.result();
      rep.verified = sums[gi] == oracle;
      rep.seconds = seconds_since(group_start);
    } catch (...) {
      failures[gi] = std::current_exception();
    }
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  out.report.verified = true;
  for (std::size_t g = 0; g < jobs.size(); ++g) {
    const auto& rep = out.report.groups[g];
    out.report.recovery = out.report.recovery || rep.recovery;
    if (!rep.verified) {
      out.report.verified = false;
      throw OracleMismatch("round " + std::to_string(round) + " group " + std::to_string(g) +
                           ": aggregate differs from the plaintext sum of its online members");
    }
    privagg::add_into_serial(out.aggregate, sums[g]);
  }

  if (params) {
    const auto merged = sketch::CountMinSketch::from_counters(*params, *seeds, out.aggregate);
    out.decoded = merged.estimate_all();
  } else {
    out.decoded = out.aggregate;
  }
  out.report.seconds = seconds_since(start);
  return out;
}

std::vector<std::vector<std::uint32_t>> synthesize_users(std::span<const std::uint32_t> target, std::size_t n_users,
                                                         std::mt19937_64& rng) {
  std::vector<std::vector<std::uint32_t>> users(n_users, std::vector<std::uint32_t>(target.size(), 0));
  std::vector<std::size_t> all(n_users);
  std::iota(all.begin(), all.end(), 0);
  std::vector<std::size_t> chosen;
  for (std::size_t l = 0; l < target.size(); ++l) {
    if (target[l] > n_users) {
      throw ValidationError("target count " + std::to_string(target[l]) + " exceeds the " +
                            std::to_string(n_users) + " simulated users");
    }
    chosen.clear();
    std::sample(all.begin(), all.end(), std::back_inserter(chosen), target[l], rng);
    for (auto u : chosen) users[u][l] = 1;
  }
  return users;
}

std::vector<OverheadRow> overhead_report(std::span<const RoundReport> reports) {
  struct Totals {
    std::size_t rounds = 0;
    std::size_t groups = 0;
    std::size_t vector_length = 0;
    std::size_t payload = 0;
    std::size_t upload = 0;
    std::size_t download = 0;
    std::size_t online = 0;
    std::size_t members = 0;
    std::size_t recoveries = 0;
    double seconds = 0.0;
  };
  std::vector<VectorMode> order;
  std::map<VectorMode, Totals> totals;
  for (const auto& r : reports) {
    if (!totals.contains(r.mode)) order.push_back(r.mode);
    auto& t = totals[r.mode];
    ++t.rounds;
    t.vector_length = r.vector_length;
    t.payload = r.vector_length * 4;
    t.seconds += r.seconds;
    for (const auto& g : r.groups) {
      ++t.groups;
      t.upload += g.upload_bytes;
      t.download += g.download_bytes;
      t.online += g.online;
      t.members += g.members;
      if (g.recovery) ++t.recoveries;
    }
  }
  std::vector<OverheadRow> rows;
  for (auto mode : order) {
    const auto& t = totals[mode];
    OverheadRow row;
    row.mode = std::string(to_string(mode));
    row.rounds = t.rounds;
    row.groups = t.groups;
    row.vector_length = t.vector_length;
    row.payload_bytes = t.payload;
    row.upload_bytes_per_user = t.online ? static_cast<double>(t.upload) / static_cast<double>(t.online) : 0.0;
    row.download_bytes_per_user = t.members ? static_cast<double>(t.download) / static_cast<double>(t.members) : 0.0;
    row.recovery_fraction = t.groups ? static_cast<double>(t.recoveries) / static_cast<double>(t.groups) : 0.0;
    row.mean_round_seconds = t.seconds / static_cast<double>(t.rounds);
    rows.push_back(row);
  }
  return rows;
}

void write_overhead_csv(std::ostream& out, std::span<const OverheadRow> rows) {
  const auto f = [](double v) { return csv::format_double(v); };
  const auto kib = [&](double bytes) { return f(bytes / 1024.0); };
  const auto kb = [&](double bytes) { return f(bytes / 1000.0); };
  out << "mode,rounds,groups,T,payload_bytes,payload_KiB,payload_KB,upload_bytes_per_user,upload_KiB,upload_KB,"
         "download_bytes_per_user,download_KiB,download_KB,recovery_fraction,mean_round_seconds\n";
  for (const auto& r : rows) {
    const auto payload = static_cast<double>(r.payload_bytes);
    out << r.mode << ',' << r.rounds << ',' << r.groups << ',' << r.vector_length << ',' << r.payload_bytes << ','
        << kib(payload) << ',' << kb(payload) << ',' << f(r.upload_bytes_per_user) << ','
        << kib(r.upload_bytes_per_user) << ',' << kb(r.upload_bytes_per_user) << ','
        << f(r.download_bytes_per_user) << ',' << kib(r.download_bytes_per_user) << ','
        << kb(r.download_bytes_per_user) << ',' << f(r.recovery_fraction) << ',' << f(r.mean_round_seconds) << '\n';
  }
}

nlohmann::json to_json(const RoundReport& r) {
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : r.groups) {
    groups.push_back({{"group", g.group},
                      {"members", g.members},
                      {"online", g.online},
                      {"announcement_bytes", g.announcement_bytes},
                      {"payload_bytes", g.payload_bytes},
                      {"ciphertext_bytes", g.ciphertext_bytes},
                      {"upload_bytes", g.upload_bytes},
                      {"download_bytes", g.download_bytes},
                      {"recovery", g.recovery},
                      {"verified", g.verified},
                      {"seconds", g.seconds}});
  }
  return nlohmann::json{{"round_id", r.round_id},     {"mode", to_string(r.mode)}, {"T", r.vector_length},
                        {"recovery", r.recovery},     {"verified", r.verified},    {"seconds", r.seconds},
                        {"groups", std::move(groups)}};
}

}  // namespace mobagg::harness
