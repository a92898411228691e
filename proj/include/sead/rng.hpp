#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace sead {

// Deterministic random source. std::mt19937_64 has a fully specified
// sequence, and every distribution here is written out by hand, so the
// same seed produces the same draws on every platform and compiler.
// Named substreams come from derive(seed, tag), which lets independent
// pieces of work (one per partition cell, one per synthetic clip) draw
// in parallel without coordinating.
class Rng {
 public:
  explicit Rng(uint64_t seed);

  static Rng derive(uint64_t seed, std::string_view tag);

  uint64_t next_u64() { return gen_(); }

  // Unbiased integer in [0, n) via rejection sampling. n must be > 0.
  uint64_t below(uint64_t n);

  // 53-bit uniform in [0, 1).
  double uniform01();
  double uniform(double lo, double hi);

  // Box-Muller; consumes two uniforms per call.
  double normal();

  // Marsaglia-Tsang for shape >= 1, boosted for shape < 1.
  double gamma(double shape);
  double beta(double a, double b);

  // First k entries of a partial Fisher-Yates pass over [0, n).
  // Draw order, not sorted.
  std::vector<uint32_t> sample_without_replacement(uint32_t n, uint32_t k);

 private:
  std::mt19937_64 gen_;
};

// SplitMix64 step; used to whiten seeds.
uint64_t splitmix64(uint64_t& state);

// Stable 64-bit hash of (seed, tag) for substream derivation.
uint64_t mix_seed(uint64_t seed, std::string_view tag);

}  // namespace sead
