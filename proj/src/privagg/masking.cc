#include "mobagg/privagg/masking.h"

#include <openssl/sha.h>

#include <cstring>

#include "mobagg/core/error.h"

// The one-block SHA256_Transform path is deprecated in OpenSSL 3 but remains
// the fastest way to hash a fixed 48-byte message.
#pragma GCC diagnostic push
#pragma GCC diagnostic ignored "-Wdeprecated-declarations"

namespace mobagg::privagg {
namespace {

// 48 message bytes, the 0x80 terminator, zero fill and a 384-bit length fit
// in a single 64-byte block, so each digest is one compression.
struct DigestBlock {
  unsigned char bytes[64];

  explicit DigestBlock(const SharedPoint& point, std::uint64_t s) {
    std::memset(bytes, 0, sizeof bytes);
    std::memcpy(bytes, point.data(), 32);
    put_be(bytes + 40, s);
    bytes[48] = 0x80;
    put_be(bytes + 56, 48 * 8);
  }

  static void put_be(unsigned char* p, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) p[i] = static_cast<unsigned char>(v >> (56 - 8 * i));
  }

  std::uint32_t digest(std::uint64_t l) {
    put_be(bytes + 32, l);
    SHA256_CTX ctx;
    SHA256_Init(&ctx);
    SHA256_Transform(&ctx, bytes);
    return static_cast<std::uint32_t>(ctx.h[7]);
  }
};

void check_lengths(std::span<std::uint32_t> acc, std::span<const std::uint32_t> v) {
  if (acc.size() != v.size()) throw ValidationError("vector lengths differ");
}

}  // namespace

std::uint32_t pair_digest(const SharedPoint& point, std::uint64_t l, std::uint64_t s) {
  DigestBlock block(point, s);
  return block.digest(l);
}

std::vector<std::uint32_t> signed_digest_sum_serial(std::span<const PairTerm> terms, std::size_t T, std::uint64_t s) {
  std::vector<std::uint32_t> out(T, 0);
  for (const auto& term : terms) {
    DigestBlock block(term.point, s);
    for (std::size_t l = 0; l < T; ++l) {
      const std::uint32_t h = block.digest(l);
      out[l] = term.subtract ? out[l] - h : out[l] + h;
    }
  }
  return out;
}

std::vector<std::uint32_t> signed_digest_sum(std::span<const PairTerm> terms, std::size_t T, std::uint64_t s) {
  std::vector<std::uint32_t> out(T, 0);
  const auto n = static_cast<std::ptrdiff_t>(T);
#pragma omp parallel
  {
    std::vector<DigestBlock> blocks;
    blocks.reserve(terms.size());
    for (const auto& term : terms) blocks.emplace_back(term.point, s);
#pragma omp for schedule(static)
    for (std::ptrdiff_t l = 0; l < n; ++l) {
      std::uint32_t acc = 0;
      for (std::size_t j = 0; j < terms.size(); ++j) {
        const std::uint32_t h = blocks[j].digest(static_cast<std::uint64_t>(l));
        acc = terms[j].subtract ? acc - h : acc + h;
      }
      out[static_cast<std::size_t>(l)] = acc;
    }
  }
  return out;
}

void add_into_serial(std::span<std::uint32_t> acc, std::span<const std::uint32_t> v) {
  check_lengths(acc, v);
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += v[i];
}

void add_into(std::span<std::uint32_t> acc, std::span<const std::uint32_t> v) {
  check_lengths(acc, v);
  const auto n = static_cast<std::ptrdiff_t>(acc.size());
#pragma omp parallel for simd schedule(static) if (n > 1 << 14)
  for (std::ptrdiff_t i = 0; i < n; ++i) acc[static_cast<std::size_t>(i)] += v[static_cast<std::size_t>(i)];
}

void subtract_into(std::span<std::uint32_t> acc, std::span<const std::uint32_t> v) {
  check_lengths(acc, v);
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] -= v[i];
}

}  // namespace mobagg::privagg

#pragma GCC diagnostic pop
