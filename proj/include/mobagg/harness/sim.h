#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "mobagg/privagg/protocol.h"
#include "mobagg/sketch/count_min.h"

namespace mobagg::harness {

using privagg::RoundId;
using privagg::UserId;

// How a user's location report is laid out:
//   station - tap-in and tap-out indicator per station (2 n entries)
//   grid    - presence per grid cell (side x side entries)
//   od      - origin-destination trip counts (n x n entries)
//   sketch  - the station vector compressed into a Count-Min sketch
enum class VectorMode { kStation, kGrid, kOd, kSketch };

std::string_view to_string(VectorMode mode);
VectorMode vector_mode_from_string(std::string_view text);

struct SimConfig {
  std::size_t n_users = 200;
  std::size_t group_size = 200;  // u
  std::size_t threshold = 100;   // tau
  double dropout_rate = 0.0;
  VectorMode mode = VectorMode::kStation;
  std::size_t n_stations = 582;
  std::size_t grid_side = 100;
  double sketch_epsilon = 0.01;
  double sketch_delta = 0.01;
  std::size_t epochs = 1;  // rounds to simulate
  std::uint64_t seed = 1;
  privagg::Kernel kernel = privagg::Kernel::kParallel;

  void validate() const;
  // |S|: entries of the plaintext report before any compression.
  std::size_t input_length() const;
  // T: entries actually encrypted per user.
  std::size_t vector_length() const;
  std::optional<sketch::SketchParams> sketch_params() const;
};

SimConfig sim_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SimConfig& config);

// Users with key pairs generated once and reused across rounds, so each
// client's shared-secret cache carries over.
class Population {
 public:
  Population(std::size_t n_users, std::uint64_t seed);

  std::size_t size() const { return clients_.size(); }
  std::vector<UserId> ids() const;
  privagg::Client& client(UserId id) { return clients_.at(id); }
  const privagg::Client& client(UserId id) const { return clients_.at(id); }

 private:
  std::vector<privagg::Client> clients_;  // indexed by user id
};

struct GroupReport {
  std::size_t group = 0;
  std::size_t members = 0;
  std::size_t online = 0;
  std::size_t announcement_bytes = 0;  // one copy, downloaded by every member
  std::size_t payload_bytes = 0;       // T * 4, the ciphertext body of one user
  std::size_t ciphertext_bytes = 0;    // one framed ciphertext
  std::size_t upload_bytes = 0;        // all member uploads, shares included
  std::size_t download_bytes = 0;      // announcements plus recovery requests
  bool recovery = false;
  bool verified = false;
  double seconds = 0.0;
};

struct RoundReport {
  RoundId round_id = 0;
  VectorMode mode = VectorMode::kStation;
  std::size_t vector_length = 0;
  std::vector<GroupReport> groups;
  bool recovery = false;  // any group needed fault recovery
  bool verified = false;  // every group matched the plaintext oracle
  double seconds = 0.0;
};

struct RoundOutput {
  // Sum of the encrypted vectors over every online user of every group (T entries).
  std::vector<std::uint32_t> aggregate;
  // The aggregate in input space (|S| entries): equal to `aggregate` unless
  // sketching, where it holds the Count-Min estimates.
  std::vector<std::uint32_t> decoded;
  RoundReport report;
};

// Hash seeds shared by every group of a round so their sketches merge.
std::uint64_t sketch_seed(const SimConfig& config, RoundId round);

// Runs one round: group assignment, encryption, aggregation and (when users
// drop out) fault recovery, checking every group against the plaintext sum
// of its online members. Throws OracleMismatch on any disagreement.
// `inputs` holds one vector of input_length() entries per user, by user id.
RoundOutput simulate_round(const SimConfig& config, Population& population, RoundId round,
                           std::span<const std::vector<std::uint32_t>> inputs);

// Splits an aggregate vector across users: for every entry, exactly
// target[l] distinct users get a 1. Throws ValidationError when a target
// exceeds n_users.
std::vector<std::vector<std::uint32_t>> synthesize_users(std::span<const std::uint32_t> target, std::size_t n_users,
                                                         std::mt19937_64& rng);

struct OverheadRow {
  std::string mode;
  std::size_t rounds = 0;
  std::size_t groups = 0;
  std::size_t vector_length = 0;
  std::size_t payload_bytes = 0;
  double upload_bytes_per_user = 0.0;
  double download_bytes_per_user = 0.0;
  double recovery_fraction = 0.0;  // share of groups that needed recovery
  double mean_round_seconds = 0.0;
};

// One row per vector mode, in order of first appearance. Byte figures are
// exact frame sizes; durations are this machine's wall clock.
std::vector<OverheadRow> overhead_report(std::span<const RoundReport> reports);

// CSV with byte columns in both KiB (1024) and KB (1000).
void write_overhead_csv(std::ostream& out, std::span<const OverheadRow> rows);

nlohmann::json to_json(const RoundReport& report);

}  // namespace mobagg::harness
