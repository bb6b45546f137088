#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mobagg/privagg/keys.h"

namespace mobagg::privagg {

// H(point || l || s) reduced to 32 bits: SHA-256 over the 32-byte shared
// point, l and s as 8-byte big-endian integers, keeping the last 4 digest
// bytes read big-endian.
std::uint32_t pair_digest(const SharedPoint& point, std::uint64_t l, std::uint64_t s);

// One pairwise term of a blinding factor: +H for a peer later in the member
// order, -H for an earlier one.
struct PairTerm {
  SharedPoint point;
  bool subtract = false;
};

// out[l] = sum over terms of +-H(point || l || s) mod 2^32, for l in [0, T).
std::vector<std::uint32_t> signed_digest_sum_serial(std::span<const PairTerm> terms, std::size_t T, std::uint64_t s);
// OpenMP kernel over l; bit-identical to the serial reference.
std::vector<std::uint32_t> signed_digest_sum(std::span<const PairTerm> terms, std::size_t T, std::uint64_t s);

// acc[l] += v[l] mod 2^32 (or -=).
void add_into_serial(std::span<std::uint32_t> acc, std::span<const std::uint32_t> v);
void add_into(std::span<std::uint32_t> acc, std::span<const std::uint32_t> v);
void subtract_into(std::span<std::uint32_t> acc, std::span<const std::uint32_t> v);

}  // namespace mobagg::privagg
