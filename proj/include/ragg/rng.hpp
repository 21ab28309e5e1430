#pragma once

#include <cstdint>

namespace ragg {

// Counter-based pseudo-random stream built on the SplitMix64 finalizer.
// The k-th 64-bit word of stream `seed` is
//
//   mix64(seed + (k + 1) * 0x9E3779B97F4A7C15)
//
// where mix64 is the xor-shift/multiply finalizer below. Every draw is a
// pure function of (seed, k), so streams are reproducible across platforms
// and can be regenerated from any position.
//
// Normal variates use the basic (non-polar) Box-Muller transform: the j-th
// normal of a stream consumes words 2j and 2j+1 as uniforms u1, u2 in (0,1]
// and returns sqrt(-2 ln u1) * cos(2 pi u2). The sine mate is discarded so
// that the j-th variate never depends on generation order.
inline std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

inline std::uint64_t stream_word(std::uint64_t seed, std::uint64_t index) {
  return mix64(seed + (index + 1) * 0x9E3779B97F4A7C15ULL);
}

// Uniform in (0, 1]; 53-bit resolution, never exactly zero (log-safe).
inline double stream_uniform01(std::uint64_t seed, std::uint64_t index) {
  return static_cast<double>((stream_word(seed, index) >> 11) + 1) * 0x1.0p-53;
}

// The index here counts normals, not words: variate j uses words 2j, 2j+1.
double stream_normal(std::uint64_t seed, std::uint64_t index);

// Stable sub-stream derivation, used for per-chunk / per-trial seeds.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return mix64(seed ^ mix64(stream + 0x9E3779B97F4A7C15ULL));
}

// Sequential convenience wrapper over the counter stream.
class Prng {
 public:
  explicit Prng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t next_u64() { return stream_word(seed_, word_++); }
  double uniform01() { return stream_uniform01(seed_, word_++); }

  // Advances to the next even word boundary so the pair layout matches
  // stream_normal exactly.
  double normal() {
    if (word_ % 2 != 0) ++word_;
    const double n = stream_normal(seed_, word_ / 2);
    word_ += 2;
    return n;
  }

  // Uniform integer in [0, bound); bound must be nonzero. The modulo bias
  // is irrelevant at the bounds used here (indices, small ranges).
  std::uint64_t below(std::uint64_t bound) { return next_u64() % bound; }

 private:
  std::uint64_t seed_;
  std::uint64_t word_ = 0;
};

}  // namespace ragg
