#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string_view>
#include <vector>

#include "mobagg/privagg/keys.h"
#include "mobagg/privagg/masking.h"

namespace mobagg::privagg {

using RoundId = std::uint64_t;

enum class Kernel { kParallel, kSerial };

// What the aggregator announces to a group for one round. Members are kept
// in ascending id order; a member's index in `members` is its position i in
// the (-1)^(i>j) sign rule.
struct GroupView {
  RoundId round_id = 0;
  std::vector<UserId> members;
  std::vector<PublicKey> public_keys;  // aligned with members
  std::size_t T = 1;                   // vector length
  std::optional<std::uint64_t> sketch_seed;

  GroupView() = default;
  // Sorts members (with their keys) ascending by id.
  GroupView(RoundId round, std::vector<UserId> ids, std::vector<PublicKey> keys, std::size_t length,
            std::optional<std::uint64_t> seed = std::nullopt);

  void validate() const;
  std::size_t size() const { return members.size(); }
  std::optional<std::size_t> position_of(UserId user) const;
  const PublicKey& key_of(UserId user) const;
};

struct CiphertextVector {
  UserId user_id = 0;
  RoundId round_id = 0;
  std::vector<std::uint32_t> entries;
};

struct RecoveryShare {
  UserId user_id = 0;
  RoundId round_id = 0;
  std::vector<std::uint32_t> entries;
};

// Shared points y_j^{x_i}, computed once per peer key and reused across rounds.
class SharedSecretCache {
 public:
  const SharedPoint& get(const Scalar& x, const PublicKey& peer);
  std::size_t size() const { return points_.size(); }

 private:
  std::map<PublicKey, SharedPoint> points_;
};

// k_il = sum_{j != i} H(y_j^{x_i} || l || s) (-1)^{i > j} mod 2^32.
std::vector<std::uint32_t> blinding_factors(const KeyPair& self, UserId self_id, const GroupView& group,
                                            Kernel kernel = Kernel::kParallel, SharedSecretCache* cache = nullptr);

// b_il = S_il + k_il mod 2^32.
CiphertextVector encrypt(std::span<const std::uint32_t> input, std::span<const std::uint32_t> k, UserId user,
                         RoundId round);

struct AggregateResult {
  std::vector<std::uint32_t> entries;
  // Members whose ciphertext is missing. Non-empty means the sum is still
  // masked and "requires recovery".
  std::vector<UserId> missing;
  bool requires_recovery() const { return !missing.empty(); }
};

// Entrywise sum of the submitted ciphertexts mod 2^32. Ciphertexts must come
// from distinct members of the group for the group's round.
AggregateResult aggregate(std::span<const CiphertextVector> ciphertexts, const GroupView& group,
                          Kernel kernel = Kernel::kParallel);

// k'_il = sum over offline j of H(y_j^{x_i} || l || s) (-1)^{i > j}.
RecoveryShare recovery_share(const KeyPair& self, UserId self_id, const GroupView& group,
                             const std::set<UserId>& online, Kernel kernel = Kernel::kParallel,
                             SharedSecretCache* cache = nullptr);

// C'_l = sum b_il - sum k'_il over the online members, mod 2^32.
std::vector<std::uint32_t> recover_aggregate(std::span<const CiphertextVector> ciphertexts,
                                             std::span<const RecoveryShare> shares, const GroupView& group);

// Random partition into groups of u. Fewer than tau users gives no groups.
// A remainder smaller than u joins the last group, so groups have between u
// and 2u - 1 members; with fewer than u users (but at least tau) one group of
// everyone is formed. A lone user never forms a group. Members come back
// sorted ascending.
std::vector<std::vector<UserId>> assign_groups(std::span<const UserId> users, std::size_t u, std::size_t tau,
                                               std::mt19937_64& rng);

// A user's side of the protocol: key pair plus a cache of shared points.
class Client {
 public:
  Client(UserId id, KeyPair keys) : id_(id), keys_(keys) {}

  UserId id() const { return id_; }
  const PublicKey& public_key() const { return keys_.y; }

  CiphertextVector encrypt(std::span<const std::uint32_t> input, const GroupView& group,
                           Kernel kernel = Kernel::kParallel);
  RecoveryShare recovery_share(const GroupView& group, const std::set<UserId>& online,
                               Kernel kernel = Kernel::kParallel);
  std::size_t cached_secrets() const { return cache_.size(); }

 private:
  UserId id_;
  KeyPair keys_;
  SharedSecretCache cache_;
};

enum class RoundState { kCollecting, kAggregated, kAwaitingRecovery, kRecovered };

std::string_view to_string(RoundState state);

// Aggregator-side state for one group and round. Submissions may arrive from
// several threads; transitions are serialized by an internal mutex.
class GroupAggregator {
 public:
  explicit GroupAggregator(GroupView group);

  const GroupView& group() const { return group_; }
  RoundState state() const;

  // Accepts one ciphertext per member while collecting.
  void submit(CiphertextVector ciphertext);

  // Closes collection. With every member in, the round is aggregated;
  // otherwise it waits for recovery shares from the online set.
  RoundState close();

  std::set<UserId> online() const;
  std::vector<UserId> offline() const;

  // Accepts a share from an online member; the last one completes recovery.
  void submit_share(RecoveryShare share);

  // Plaintext sum over the contributing members once aggregated or recovered.
  std::vector<std::uint32_t> result() const;

 private:
  GroupView group_;
  mutable std::mutex mutex_;
  RoundState state_ = RoundState::kCollecting;
  std::map<UserId, CiphertextVector> ciphertexts_;
  std::map<UserId, RecoveryShare> shares_;
  std::vector<std::uint32_t> result_;
};

}  // namespace mobagg::privagg
