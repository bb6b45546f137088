#include "mobagg/sketch/count_min.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <numbers>
#include <random>

#include "mobagg/core/error.h"

namespace mobagg::sketch {
namespace {

class Writer {
 public:
  template <class T>
  void put(T value) {
    std::uint8_t raw[sizeof(T)];
    std::memcpy(raw, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(raw, raw + sizeof(T));
    bytes.insert(bytes.end(), raw, raw + sizeof(T));
  }
  std::vector<std::uint8_t> bytes;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : bytes_(b) {}
  template <class T>
  T get() {
    if (pos_ + sizeof(T) > bytes_.size()) throw ValidationError("truncated sketch encoding");
    std::uint8_t raw[sizeof(T)];
    std::memcpy(raw, bytes_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(raw, raw + sizeof(T));
    pos_ += sizeof(T);
    T value;
    std::memcpy(&value, raw, sizeof(T));
    return value;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

constexpr std::uint32_t kMagic = 0x31534d43;  // "CMS1" little-endian

}  // namespace

SketchParams make_params(std::uint64_t input_size, double epsilon, double delta) {
  if (input_size < 1) throw ValidationError("sketch input size must be at least 1");
  if (!(epsilon > 0.0 && epsilon < 1.0) || !(delta > 0.0 && delta < 1.0)) {
    throw ValidationError("sketch epsilon and delta must lie in (0, 1)");
  }
  SketchParams p;
  p.epsilon = epsilon;
  p.delta = delta;
  p.input_size = input_size;
  const double rows = std::ceil(std::log(static_cast<double>(input_size) / delta));
  const double cols = std::ceil(std::numbers::e / epsilon);
  p.d = static_cast<std::uint32_t>(std::max(1.0, rows));
  p.w = static_cast<std::uint32_t>(std::max(1.0, cols));
  return p;
}

HashSeeds make_seeds(std::uint32_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint64_t> pick_a(1, kMersenne61 - 1);
  std::uniform_int_distribution<std::uint64_t> pick_b(0, kMersenne61 - 1);
  HashSeeds s;
  for (std::uint32_t i = 0; i < d; ++i) {
    s.a.push_back(pick_a(rng));
    s.b.push_back(pick_b(rng));
  }
  return s;
}

CountMinSketch::CountMinSketch(const SketchParams& params, HashSeeds seeds)
    : params_(params), seeds_(std::move(seeds)), counters_(params.size(), 0) {
  if (params_.d < 1 || params_.w < 1) throw ValidationError("sketch dimensions must be positive");
  if (seeds_.rows() != params_.d || seeds_.b.size() != params_.d) throw ValidationError("seed count must equal d");
  if (seeds_.prime < 2) throw ValidationError("hash prime must be at least 2");
  for (std::size_t i = 0; i < seeds_.rows(); ++i) {
    if (seeds_.a[i] == 0 || seeds_.a[i] >= seeds_.prime || seeds_.b[i] >= seeds_.prime) {
      throw ValidationError("hash seeds must satisfy 0 < a < p and 0 <= b < p");
    }
  }
}

CountMinSketch CountMinSketch::from_counters(const SketchParams& params, HashSeeds seeds,
                                             std::vector<std::uint32_t> counters) {
  CountMinSketch s(params, std::move(seeds));
  if (counters.size() != s.counters_.size()) throw ValidationError("counter table has the wrong size");
  s.counters_ = std::move(counters);
  return s;
}

std::size_t CountMinSketch::column(std::size_t row, std::uint64_t key) const {
  const unsigned __int128 v =
      static_cast<unsigned __int128>(seeds_.a[row]) * key + static_cast<unsigned __int128>(seeds_.b[row]);
  return static_cast<std::size_t>(static_cast<std::uint64_t>(v % seeds_.prime) % params_.w);
}

void CountMinSketch::check_key(std::uint64_t key) const {
  if (key >= params_.input_size) throw ValidationError("sketch key out of range");
}

void CountMinSketch::update(std::uint64_t key, std::uint32_t amount) {
  check_key(key);
  for (std::size_t r = 0; r < params_.d; ++r) counters_[r * params_.w + column(r, key)] += amount;
}

std::uint32_t CountMinSketch::estimate(std::uint64_t key) const {
  check_key(key);
  std::uint32_t best = std::numeric_limits<std::uint32_t>::max();
  for (std::size_t r = 0; r < params_.d; ++r) best = std::min(best, counters_[r * params_.w + column(r, key)]);
  return best;
}

std::vector<std::uint32_t> CountMinSketch::estimate_all() const {
  std::vector<std::uint32_t> out(params_.input_size);
  for (std::uint64_t k = 0; k < params_.input_size; ++k) out[k] = estimate(k);
  return out;
}

std::vector<std::uint8_t> CountMinSketch::serialize() const {
  Writer w;
  w.put(kMagic);
  w.put(params_.d);
  w.put(params_.w);
  w.put(params_.input_size);
  w.put(params_.epsilon);
  w.put(params_.delta);
  w.put(seeds_.prime);
  for (std::size_t i = 0; i < seeds_.rows(); ++i) {
    w.put(seeds_.a[i]);
    w.put(seeds_.b[i]);
  }
  for (auto c : counters_) w.put(c);
  return std::move(w.bytes);
}

CountMinSketch CountMinSketch::deserialize(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  if (r.get<std::uint32_t>() != kMagic) throw ValidationError("not a sketch encoding");
  SketchParams p;
  p.d = r.get<std::uint32_t>();
  p.w = r.get<std::uint32_t>();
  p.input_size = r.get<std::uint64_t>();
  p.epsilon = r.get<double>();
  p.delta = r.get<double>();
  if (p.d == 0 || p.w == 0 || p.d > (1u << 16) || p.w > (1u << 26)) throw ValidationError("implausible sketch shape");
  HashSeeds s;
  s.prime = r.get<std::uint64_t>();
  for (std::uint32_t i = 0; i < p.d; ++i) {
    s.a.push_back(r.get<std::uint64_t>());
    s.b.push_back(r.get<std::uint64_t>());
  }
  std::vector<std::uint32_t> counters(p.size());
  for (auto& c : counters) c = r.get<std::uint32_t>();
  if (!r.done()) throw ValidationError("trailing bytes after sketch encoding");
  return from_counters(p, std::move(s), std::move(counters));
}

CountMinSketch merge(const CountMinSketch& a, const CountMinSketch& b) {
  if (!(a.params() == b.params()) || !(a.seeds() == b.seeds())) {
    throw ValidationError("cannot merge sketches with different parameters or seeds");
  }
  std::vector<std::uint32_t> sum(a.counters().begin(), a.counters().end());
  for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += b.counters()[i];
  return CountMinSketch::from_counters(a.params(), a.seeds(), std::move(sum));
}

CountMinSketch encode_vector(std::span<const std::uint32_t> values, const SketchParams& params,
                             const HashSeeds& seeds) {
  if (values.size() != params.input_size) throw ValidationError("vector length does not match sketch input size");
  CountMinSketch s(params, seeds);
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (values[k] != 0) s.update(k, values[k]);
  }
  return s;
}

}  // namespace mobagg::sketch
