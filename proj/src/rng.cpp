#include "sead/rng.hpp"

#include <cmath>
#include <numbers>

#include "sead/error.hpp"

namespace sead {

uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

uint64_t mix_seed(uint64_t seed, std::string_view tag) {
  // FNV-1a over the tag bytes, folded into the seed through splitmix.
  uint64_t h = 14695981039346656037ULL;
  for (char c : tag) {
    h ^= static_cast<uint8_t>(c);
    h *= 1099511628211ULL;
  }
  uint64_t state = seed ^ h;
  uint64_t a = splitmix64(state);
  uint64_t b = splitmix64(state);
  return a ^ (b << 1);
}

Rng::Rng(uint64_t seed) {
  uint64_t state = seed;
  gen_.seed(splitmix64(state));
}

Rng Rng::derive(uint64_t seed, std::string_view tag) {
  return Rng(mix_seed(seed, tag));
}

uint64_t Rng::below(uint64_t n) {
  if (n == 0) throw Error(ErrorCode::internal, "Rng::below(0)");
  if ((n & (n - 1)) == 0) return next_u64() & (n - 1);
  const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % n;
}

double Rng::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

double Rng::normal() {
  const double u1 = uniform01();
  const double u2 = uniform01();
  const double r = std::sqrt(-2.0 * std::log1p(-u1));
  return r * std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::gamma(double shape) {
  if (!(shape > 0.0)) throw Error(ErrorCode::internal, "gamma shape must be > 0");
  if (shape < 1.0) {
    const double u = std::max(uniform01(), 0x1.0p-53);
    return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = normal();
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    const double u = std::max(uniform01(), 0x1.0p-53);
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double Rng::beta(double a, double b) {
  const double x = gamma(a);
  const double y = gamma(b);
  return x / (x + y);
}

std::vector<uint32_t> Rng::sample_without_replacement(uint32_t n, uint32_t k) {
  if (k > n) throw Error(ErrorCode::internal, "sample_without_replacement: k > n");
  std::vector<uint32_t> idx(n);
  for (uint32_t i = 0; i < n; ++i) idx[i] = i;
  for (uint32_t i = 0; i < k; ++i) {
    const uint32_t j = i + static_cast<uint32_t>(below(n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  return idx;
}

}  // namespace sead
