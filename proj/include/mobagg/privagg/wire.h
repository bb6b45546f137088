#pragma once

#include <cstddef>
#include <cstdint>
#include <set>
#include <span>
#include <vector>

#include "mobagg/privagg/protocol.h"

namespace mobagg::privagg::wire {

// Every message is two length-prefixed sections:
//   u32 LE header length | UTF-8 JSON header | u32 LE body length | body
// The body carries the bulk data in binary: 32-byte public keys for an
// announcement, T little-endian u32 words for ciphertexts and shares.
using Bytes = std::vector<std::uint8_t>;

inline constexpr std::size_t kPrefixBytes = 4;

struct Frame {
  Bytes header;  // JSON text
  Bytes body;
  std::size_t size() const { return 2 * kPrefixBytes + header.size() + body.size(); }
};

Bytes encode(const Frame& frame);
Frame decode(std::span<const std::uint8_t> bytes);

// Header {"round_id", "members", "T", optional "sketch_seed"}, body = keys in member order.
Frame announcement(const GroupView& group);
GroupView parse_announcement(const Frame& frame);

// Header {"user_id", "round_id"}, body = entries.
Frame ciphertext(const CiphertextVector& c);
CiphertextVector parse_ciphertext(const Frame& frame);

// Header {"round_id", "online"}, empty body.
Frame recovery_request(RoundId round, const std::set<UserId>& online);
std::set<UserId> parse_recovery_request(const Frame& frame, RoundId& round);

// Same layout as a ciphertext.
Frame recovery_share(const RecoveryShare& s);
RecoveryShare parse_recovery_share(const Frame& frame);

}  // namespace mobagg::privagg::wire
