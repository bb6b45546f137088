#include "mobagg/privagg/protocol.h"

#include <algorithm>
#include <numeric>
#include <string>

#include "mobagg/core/error.h"

namespace mobagg::privagg {
namespace {

std::vector<PairTerm> pair_terms(const KeyPair& self, std::size_t i, const GroupView& group,
                                 const std::set<UserId>* only, SharedSecretCache* cache) {
  SharedSecretCache local;
  SharedSecretCache& secrets = cache ? *cache : local;
  std::vector<PairTerm> terms;
  for (std::size_t j = 0; j < group.size(); ++j) {
    if (j == i) continue;
    if (only && !only->contains(group.members[j])) continue;
    terms.push_back({secrets.get(self.x, group.public_keys[j]), i > j});
  }
  return terms;
}

std::vector<std::uint32_t> digest_sum(std::span<const PairTerm> terms, std::size_t T, RoundId s, Kernel kernel) {
  return kernel == Kernel::kSerial ? signed_digest_sum_serial(terms, T, s) : signed_digest_sum(terms, T, s);
}

std::size_t require_member(const GroupView& group, UserId user) {
  const auto i = group.position_of(user);
  if (!i) throw ValidationError("user " + std::to_string(user) + " is not a member of the group");
  return *i;
}

void check_entries(const GroupView& group, UserId user, RoundId round, std::size_t length) {
  require_member(group, user);
  if (round != group.round_id) throw ValidationError("message belongs to a different round");
  if (length != group.T) throw ValidationError("vector length does not match the round's T");
}

}  // namespace

GroupView::GroupView(RoundId round, std::vector<UserId> ids, std::vector<PublicKey> keys, std::size_t length,
                     std::optional<std::uint64_t> seed)
    : round_id(round), T(length), sketch_seed(seed) {
  if (ids.size() != keys.size()) throw ValidationError("one public key per member is required");
  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ids[a] < ids[b]; });
  for (auto k : order) {
    members.push_back(ids[k]);
    public_keys.push_back(keys[k]);
  }
  validate();
}

void GroupView::validate() const {
  if (T < 1) throw ValidationError("vector length T must be at least 1");
  if (members.empty()) throw ValidationError("a group needs at least one member");
  if (members.size() != public_keys.size()) throw ValidationError("one public key per member is required");
  for (std::size_t i = 1; i < members.size(); ++i) {
    if (members[i - 1] >= members[i]) throw ValidationError("members must be distinct and ascending");
  }
}

std::optional<std::size_t> GroupView::position_of(UserId user) const {
  const auto it = std::lower_bound(members.begin(), members.end(), user);
  if (it == members.end() || *it != user) return std::nullopt;
  return static_cast<std::size_t>(it - members.begin());
}

const PublicKey& GroupView::key_of(UserId user) const { return public_keys[require_member(*this, user)]; }

const SharedPoint& SharedSecretCache::get(const Scalar& x, const PublicKey& peer) {
  auto it = points_.find(peer);
  if (it == points_.end()) it = points_.emplace(peer, shared_point(x, peer)).first;
  return it->second;
}

std::vector<std::uint32_t> blinding_factors(const KeyPair& self, UserId self_id, const GroupView& group,
                                            Kernel kernel, SharedSecretCache* cache) {
  const std::size_t i = require_member(group, self_id);
  const auto terms = pair_terms(self, i, group, nullptr, cache);
  return digest_sum(terms, group.T, group.round_id, kernel);
}

CiphertextVector encrypt(std::span<const std::uint32_t> input, std::span<const std::uint32_t> k, UserId user,
                         RoundId round) {
  if (input.size() != k.size()) throw ValidationError("input and blinding factors differ in length");
  CiphertextVector c{user, round, std::vector<std::uint32_t>(input.begin(), input.end())};
  add_into(c.entries, k);
  return c;
}

AggregateResult aggregate(std::span<const CiphertextVector> ciphertexts, const GroupView& group, Kernel kernel) {
  AggregateResult out;
  out.entries.assign(group.T, 0);
  std::set<UserId> seen;
  for (const auto& c : ciphertexts) {
    check_entries(group, c.user_id, c.round_id, c.entries.size());
    if (!seen.insert(c.user_id).second) throw ValidationError("duplicate ciphertext from one member");
    if (kernel == Kernel::kSerial) {
      add_into_serial(out.entries, c.entries);
    } else {
      add_into(out.entries, c.entries);
    }
  }
  for (auto m : group.members) {
    if (!seen.contains(m)) out.missing.push_back(m);
  }
  return out;
}

RecoveryShare recovery_share(const KeyPair& self, UserId self_id, const GroupView& group,
                             const std::set<UserId>& online, Kernel kernel, SharedSecretCache* cache) {
  const std::size_t i = require_member(group, self_id);
  if (!online.contains(self_id)) throw ValidationError("an offline member cannot produce a recovery share");
  std::set<UserId> offline;
  for (auto m : group.members) {
    if (!online.contains(m)) offline.insert(m);
  }
  const auto terms = pair_terms(self, i, group, &offline, cache);
  return {self_id, group.round_id, digest_sum(terms, group.T, group.round_id, kernel)};
}

std::vector<std::uint32_t> recover_aggregate(std::span<const CiphertextVector> ciphertexts,
                                             std::span<const RecoveryShare> shares, const GroupView& group) {
  auto partial = aggregate(ciphertexts, group);
  std::set<UserId> online;
  for (const auto& c : ciphertexts) online.insert(c.user_id);
  std::set<UserId> shared;
  for (const auto& s : shares) {
    check_entries(group, s.user_id, s.round_id, s.entries.size());
    if (!online.contains(s.user_id)) throw ValidationError("recovery share from a member without a ciphertext");
    if (!shared.insert(s.user_id).second) throw ValidationError("duplicate recovery share");
    subtract_into(partial.entries, s.entries);
  }
  if (shared.size() != online.size()) throw ValidationError("missing recovery share from an online member");
  return partial.entries;
}

std::vector<std::vector<UserId>> assign_groups(std::span<const UserId> users, std::size_t u, std::size_t tau,
                                               std::mt19937_64& rng) {
  if (u < 2) throw ValidationError("group size must be at least 2");
  std::vector<std::vector<UserId>> groups;
  if (users.size() < tau || users.size() < 2) return groups;
  std::vector<UserId> shuffled(users.begin(), users.end());
  std::sort(shuffled.begin(), shuffled.end());
  if (std::adjacent_find(shuffled.begin(), shuffled.end()) != shuffled.end()) {
    throw ValidationError("user ids must be distinct");
  }
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const std::size_t full = std::max<std::size_t>(1, shuffled.size() / u);
  for (std::size_t g = 0; g < full; ++g) {
    const auto begin = shuffled.begin() + static_cast<std::ptrdiff_t>(g * u);
    const auto end = g + 1 == full ? shuffled.end() : begin + static_cast<std::ptrdiff_t>(u);
    std::vector<UserId> members(begin, end);
    std::sort(members.begin(), members.end());
    groups.push_back(std::move(members));
  }
  return groups;
}

CiphertextVector Client::encrypt(std::span<const std::uint32_t> input, const GroupView& group, Kernel kernel) {
  if (input.size() != group.T) throw ValidationError("input length does not match the round's T");
  const auto k = blinding_factors(keys_, id_, group, kernel, &cache_);
  return privagg::encrypt(input, k, id_, group.round_id);
}

RecoveryShare Client::recovery_share(const GroupView& group, const std::set<UserId>& online, Kernel kernel) {
  return privagg::recovery_share(keys_, id_, group, online, kernel, &cache_);
}

std::string_view to_string(RoundState state) {
  switch (state) {
    case RoundState::kCollecting:
      return "collecting";
    case RoundState::kAggregated:
      return "aggregated";
    case RoundState::kAwaitingRecovery:
      return "awaiting-recovery";
    case RoundState::kRecovered:
      return "recovered";
  }
  return "collecting";
}

GroupAggregator::GroupAggregator(GroupView group) : group_(std::move(group)) { group_.validate(); }

RoundState GroupAggregator::state() const {
  std::lock_guard lock(mutex_);
  return state_;
}

void GroupAggregator::submit(CiphertextVector ciphertext) {
  std::lock_guard lock(mutex_);
  if (state_ != RoundState::kCollecting) throw ValidationError("round is no longer collecting ciphertexts");
  check_entries(group_, ciphertext.user_id, ciphertext.round_id, ciphertext.entries.size());
  const UserId user = ciphertext.user_id;
  if (!ciphertexts_.emplace(user, std::move(ciphertext)).second) {
    throw ValidationError("duplicate ciphertext from one member");
  }
}

RoundState GroupAggregator::close() {
  std::lock_guard lock(mutex_);
  if (state_ != RoundState::kCollecting) throw ValidationError("round already closed");
  if (ciphertexts_.empty()) throw ValidationError("no member submitted a ciphertext");
  result_.assign(group_.T, 0);
  for (const auto& [user, c] : ciphertexts_) add_into(result_, c.entries);
  state_ = ciphertexts_.size() == group_.size() ? RoundState::kAggregated : RoundState::kAwaitingRecovery;
  return state_;
}

std::set<UserId> GroupAggregator::online() const {
  std::lock_guard lock(mutex_);
  std::set<UserId> out;
  for (const auto& [user, c] : ciphertexts_) out.insert(user);
  return out;
}

std::vector<UserId> GroupAggregator::offline() const {
  std::lock_guard lock(mutex_);
  std::vector<UserId> out;
  for (auto m : group_.members) {
    if (!ciphertexts_.contains(m)) out.push_back(m);
  }
  return out;
}

void GroupAggregator::submit_share(RecoveryShare share) {
  std::lock_guard lock(mutex_);
  if (state_ != RoundState::kAwaitingRecovery) throw ValidationError("round is not awaiting recovery");
  check_entries(group_, share.user_id, share.round_id, share.entries.size());
  if (!ciphertexts_.contains(share.user_id)) throw ValidationError("recovery share from an offline member");
  const UserId user = share.user_id;
  if (!shares_.emplace(user, std::move(share)).second) throw ValidationError("duplicate recovery share");
  if (shares_.size() == ciphertexts_.size()) {
    for (const auto& [id, s] : shares_) subtract_into(result_, s.entries);
    state_ = RoundState::kRecovered;
  }
}

std::vector<std::uint32_t> GroupAggregator::result() const {
  std::lock_guard lock(mutex_);
  if (state_ != RoundState::kAggregated && state_ != RoundState::kRecovered) {
    throw ValidationError("round has no plaintext aggregate yet");
  }
  return result_;
}

}  // namespace mobagg::privagg
