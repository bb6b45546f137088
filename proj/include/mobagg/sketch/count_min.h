#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace mobagg::sketch {

struct SketchParams {
  double epsilon = 0.01;
  double delta = 0.01;
  std::uint64_t input_size = 1;  // |S|, keys are [0, input_size)
  std::uint32_t d = 1;           // rows, ceil(ln(|S| / delta))
  std::uint32_t w = 1;           // columns, ceil(e / epsilon)

  std::size_t size() const { return static_cast<std::size_t>(d) * w; }
  friend bool operator==(const SketchParams&, const SketchParams&) = default;
};

SketchParams make_params(std::uint64_t input_size, double epsilon, double delta);

inline constexpr std::uint64_t kMersenne61 = (std::uint64_t{1} << 61) - 1;

// Row i hashes x to ((a_i x + b_i) mod prime) mod w, with 1 <= a_i < prime.
struct HashSeeds {
  std::uint64_t prime = kMersenne61;
  std::vector<std::uint64_t> a;
  std::vector<std::uint64_t> b;

  std::size_t rows() const { return a.size(); }
  friend bool operator==(const HashSeeds&, const HashSeeds&) = default;
};

// Deterministic seeds for d rows from a 64-bit seed; every member of a group
// derives identical seeds from the seed in the round announcement.
HashSeeds make_seeds(std::uint32_t d, std::uint64_t seed);

class CountMinSketch {
 public:
  CountMinSketch(const SketchParams& params, HashSeeds seeds);

  // Rebuilds a sketch around an existing counter table (e.g. a decrypted aggregate).
  static CountMinSketch from_counters(const SketchParams& params, HashSeeds seeds, std::vector<std::uint32_t> counters);

  void update(std::uint64_t key, std::uint32_t amount = 1);
  std::uint32_t estimate(std::uint64_t key) const;
  // Estimates for every key in [0, input_size).
  std::vector<std::uint32_t> estimate_all() const;

  std::size_t column(std::size_t row, std::uint64_t key) const;

  const SketchParams& params() const { return params_; }
  const HashSeeds& seeds() const { return seeds_; }
  std::span<const std::uint32_t> counters() const { return counters_; }

  // Header (magic "CMS1", d, w, input_size, epsilon, delta, prime, seeds)
  // followed by row-major counters; every field little-endian.
  std::vector<std::uint8_t> serialize() const;
  static CountMinSketch deserialize(std::span<const std::uint8_t> bytes);

  friend bool operator==(const CountMinSketch&, const CountMinSketch&) = default;

 private:
  void check_key(std::uint64_t key) const;

  SketchParams params_;
  HashSeeds seeds_;
  std::vector<std::uint32_t> counters_;
};

// Elementwise counter sum mod 2^32. Parameters and seeds must match.
CountMinSketch merge(const CountMinSketch& a, const CountMinSketch& b);

// Sketch of a dense vector of length input_size.
CountMinSketch encode_vector(std::span<const std::uint32_t> values, const SketchParams& params, const HashSeeds& seeds);

}  // namespace mobagg::sketch
