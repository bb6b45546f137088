#include "mobagg/privagg/wire.h"

#include <algorithm>
#include <cstring>

#include "json.hpp"
#include "mobagg/core/error.h"

namespace mobagg::privagg::wire {
namespace {

void put_u32(Bytes& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t pos) {
  if (pos + 4 > bytes.size()) throw ValidationError("truncated message");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[pos + static_cast<std::size_t>(i)]) << (8 * i);
  return v;
}

Bytes json_bytes(const nlohmann::json& j) {
  const std::string text = j.dump();
  return {text.begin(), text.end()};
}

nlohmann::json parse_header(const Frame& frame) {
  try {
    return nlohmann::json::parse(frame.header.begin(), frame.header.end());
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed message header: ") + e.what());
  }
}

Bytes words(std::span<const std::uint32_t> entries) {
  Bytes out;
  out.reserve(entries.size() * 4);
  for (auto v : entries) put_u32(out, v);
  return out;
}

std::vector<std::uint32_t> parse_words(const Bytes& body) {
  if (body.size() % 4 != 0) throw ValidationError("vector body is not a whole number of 32-bit words");
  std::vector<std::uint32_t> out(body.size() / 4);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = get_u32(body, 4 * i);
  return out;
}

template <class T>
T field(const nlohmann::json& j, const char* name) {
  if (!j.contains(name)) throw ValidationError(std::string("message header lacks \"") + name + "\"");
  try {
    return j.at(name).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ValidationError(std::string("message header field \"") + name + "\" has the wrong type");
  }
}

}  // namespace

Bytes encode(const Frame& frame) {
  Bytes out;
  out.reserve(frame.size());
  put_u32(out, static_cast<std::uint32_t>(frame.header.size()));
  out.insert(out.end(), frame.header.begin(), frame.header.end());
  put_u32(out, static_cast<std::uint32_t>(frame.body.size()));
  out.insert(out.end(), frame.body.begin(), frame.body.end());
  return out;
}

Frame decode(std::span<const std::uint8_t> bytes) {
  Frame f;
  const std::size_t header_len = get_u32(bytes, 0);
  if (kPrefixBytes + header_len > bytes.size()) throw ValidationError("truncated message header");
  f.header.assign(bytes.begin() + kPrefixBytes, bytes.begin() + static_cast<std::ptrdiff_t>(kPrefixBytes + header_len));
  const std::size_t body_at = kPrefixBytes + header_len;
  const std::size_t body_len = get_u32(bytes, body_at);
  if (body_at + kPrefixBytes + body_len != bytes.size()) throw ValidationError("message length mismatch");
  f.body.assign(bytes.begin() + static_cast<std::ptrdiff_t>(body_at + kPrefixBytes), bytes.end());
  return f;
}

Frame announcement(const GroupView& group) {
  nlohmann::json h{{"round_id", group.round_id}, {"members", group.members}, {"T", group.T}};
  if (group.sketch_seed) h["sketch_seed"] = *group.sketch_seed;
  Frame f{json_bytes(h), {}};
  f.body.reserve(group.public_keys.size() * 32);
  for (const auto& k : group.public_keys) f.body.insert(f.body.end(), k.begin(), k.end());
  return f;
}

GroupView parse_announcement(const Frame& frame) {
  const auto h = parse_header(frame);
  const auto members = field<std::vector<UserId>>(h, "members");
  if (frame.body.size() != members.size() * 32) throw ValidationError("announcement carries the wrong number of keys");
  std::vector<PublicKey> keys(members.size());
  for (std::size_t i = 0; i < keys.size(); ++i) {
    std::copy_n(frame.body.begin() + static_cast<std::ptrdiff_t>(32 * i), 32, keys[i].begin());
  }
  std::optional<std::uint64_t> seed;
  if (h.contains("sketch_seed")) seed = field<std::uint64_t>(h, "sketch_seed");
  return GroupView(field<RoundId>(h, "round_id"), members, std::move(keys), field<std::size_t>(h, "T"), seed);
}

Frame ciphertext(const CiphertextVector& c) {
  return {json_bytes({{"user_id", c.user_id}, {"round_id", c.round_id}}), words(c.entries)};
}

CiphertextVector parse_ciphertext(const Frame& frame) {
  const auto h = parse_header(frame);
  return {field<UserId>(h, "user_id"), field<RoundId>(h, "round_id"), parse_words(frame.body)};
}

Frame recovery_request(RoundId round, const std::set<UserId>& online) {
  return {json_bytes({{"round_id", round}, {"online", online}}), {}};
}

std::set<UserId> parse_recovery_request(const Frame& frame, RoundId& round) {
  const auto h = parse_header(frame);
  round = field<RoundId>(h, "round_id");
  const auto ids = field<std::vector<UserId>>(h, "online");
  return {ids.begin(), ids.end()};
}

Frame recovery_share(const RecoveryShare& s) {
  return {json_bytes({{"user_id", s.user_id}, {"round_id", s.round_id}}), words(s.entries)};
}

RecoveryShare parse_recovery_share(const Frame& frame) {
  const auto h = parse_header(frame);
  return {field<UserId>(h, "user_id"), field<RoundId>(h, "round_id"), parse_words(frame.body)};
}

}  // namespace mobagg::privagg::wire
