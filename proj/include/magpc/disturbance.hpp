#pragma once

#include "magpc/linalg.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace magpc {

enum class DisturbanceKind {
  kConstant,
  kClippedGaussian,
  kSinusoidal,
  kSignSwitching,
  kBernoulliScalar,
  kExplicitSequence,
};

std::string_view to_string(DisturbanceKind kind);
DisturbanceKind disturbance_kind_from_string(std::string_view name);

struct DisturbanceSpec {
  DisturbanceKind kind = DisturbanceKind::kConstant;
  Vec value;                   // constant vector / sign-switching direction
  double amplitude = 0.0;      // sinusoidal, bernoulli-scalar
  double period = 1.0;         // sinusoidal period; sign-switching block length
  double sigma = 1.0;          // clipped-gaussian scale
  double clip = -1.0;          // clipped-gaussian clip level (< 0 means W)
  double probability = 0.5;    // bernoulli-scalar
  std::vector<Vec> sequence;   // explicit-sequence, indexed t mod length
  std::uint64_t seed = 0;
};

// Oblivious disturbance source: output depends only on (spec, t).
class DisturbanceGenerator {
 public:
  DisturbanceGenerator(DisturbanceSpec spec, int d, double W);

  Vec generate(int t) const;
  const DisturbanceSpec& spec() const { return spec_; }
  int d() const { return d_; }
  double W() const { return W_; }
  // True when every round emits the same vector.
  bool is_constant() const;

 private:
  Vec enforce_bound(Vec w) const;

  DisturbanceSpec spec_;
  int d_;
  double W_;
  Vec phases_;
};

}  // namespace magpc
