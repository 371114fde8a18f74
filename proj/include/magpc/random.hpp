#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace magpc {

// Recorded in manifests; bump if the derivation below changes.
inline constexpr std::string_view kPrngTag = "mt19937_64+splitmix64/v1";

std::uint64_t splitmix64(std::uint64_t x);

// Derive an independent stream seed from a master seed and up to two indices.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

// std distributions are implementation-defined, so the uniform and normal
// transforms are spelled out here to keep sequences portable.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  std::uint64_t next() { return engine_(); }
  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Box-Muller, one draw per call (the pair's second value is discarded).
  double normal();
  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace magpc
