#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>

namespace mobagg::privagg {

using UserId = std::uint64_t;

// Canonical 32-byte ristretto255 encodings.
using Scalar = std::array<std::uint8_t, 32>;
using PublicKey = std::array<std::uint8_t, 32>;
using SharedPoint = std::array<std::uint8_t, 32>;

struct KeyPair {
  Scalar x{};      // private key
  PublicKey y{};   // g^x
};

// Uniform private key from the OS entropy source.
KeyPair keygen();

// Reproducible key pair: the 32-byte seed drives libsodium's deterministic
// generator, whose 64-byte output is reduced to a scalar.
KeyPair keygen(std::span<const std::uint8_t, 32> seed);

// Convenience seed expansion for simulations: (seed, user) -> 32-byte seed.
KeyPair keygen(std::uint64_t seed, UserId user);

bool valid_public_key(const PublicKey& y);

// y^x. Throws ValidationError for an invalid point or an identity result.
SharedPoint shared_point(const Scalar& x, const PublicKey& y);

std::string to_hex(std::span<const std::uint8_t> bytes);

}  // namespace mobagg::privagg
