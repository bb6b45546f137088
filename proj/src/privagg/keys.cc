#include "mobagg/privagg/keys.h"

#include <sodium.h>

#include <stdexcept>

#include "mobagg/core/error.h"

namespace mobagg::privagg {
namespace {

void ensure_sodium() {
  static const int status = sodium_init();
  if (status < 0) throw std::runtime_error("libsodium failed to initialise");
}

KeyPair from_wide(const std::uint8_t (&wide)[crypto_core_ristretto255_NONREDUCEDSCALARBYTES]) {
  KeyPair k;
  crypto_core_ristretto255_scalar_reduce(k.x.data(), wide);
  // A zero scalar has probability 2^-252; it would make y the identity.
  if (sodium_is_zero(k.x.data(), k.x.size())) throw std::runtime_error("degenerate private key");
  if (crypto_scalarmult_ristretto255_base(k.y.data(), k.x.data()) != 0) {
    throw std::runtime_error("public key derivation failed");
  }
  return k;
}

}  // namespace

KeyPair keygen() {
  ensure_sodium();
  std::uint8_t wide[crypto_core_ristretto255_NONREDUCEDSCALARBYTES];
  randombytes_buf(wide, sizeof wide);
  return from_wide(wide);
}

KeyPair keygen(std::span<const std::uint8_t, 32> seed) {
  ensure_sodium();
  static_assert(randombytes_SEEDBYTES == 32);
  std::uint8_t wide[crypto_core_ristretto255_NONREDUCEDSCALARBYTES];
  randombytes_buf_deterministic(wide, sizeof wide, seed.data());
  return from_wide(wide);
}

KeyPair keygen(std::uint64_t seed, UserId user) {
  ensure_sodium();
  std::uint8_t input[16];
  for (int i = 0; i < 8; ++i) {
    input[i] = static_cast<std::uint8_t>(seed >> (56 - 8 * i));
    input[8 + i] = static_cast<std::uint8_t>(user >> (56 - 8 * i));
  }
  std::array<std::uint8_t, 32> expanded{};
  crypto_generichash(expanded.data(), expanded.size(), input, sizeof input, nullptr, 0);
  return keygen(std::span<const std::uint8_t, 32>(expanded));
}

bool valid_public_key(const PublicKey& y) {
  ensure_sodium();
  return crypto_core_ristretto255_is_valid_point(y.data()) == 1;
}

SharedPoint shared_point(const Scalar& x, const PublicKey& y) {
  ensure_sodium();
  SharedPoint out{};
  if (crypto_scalarmult_ristretto255(out.data(), x.data(), y.data()) != 0) {
    throw ValidationError("invalid public key in key agreement");
  }
  return out;
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
  std::string out(bytes.size() * 2 + 1, '\0');
  sodium_bin2hex(out.data(), out.size(), bytes.data(), bytes.size());
  out.pop_back();
  return out;
}

}  // namespace mobagg::privagg
