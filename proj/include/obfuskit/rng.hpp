#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>

namespace obfuskit {

// Portable draws on top of mt19937_64. The standard distributions are
// implementation-defined, so bounded integers and unit doubles are derived
// from raw engine output to keep runs byte-identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, n). n must be > 0.
  std::size_t uniform_index(std::size_t n);

  // Uniform in [0, 1) with 53 bits of precision.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform01() < p; }

  // Index drawn proportionally to non-negative weights; requires a positive sum.
  std::size_t weighted_index(std::span<const double> weights);

  // Independent stream derived from this generator's seed space.
  Rng fork(std::uint64_t stream) { return Rng(next() ^ (stream * 0x9E3779B97F4A7C15ULL)); }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t fnv1a64(std::string_view data, std::uint64_t basis = 0xcbf29ce484222325ULL);
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b);
std::string hex64(std::uint64_t value);

}  // namespace obfuskit
