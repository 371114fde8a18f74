#include "magpc/disturbance.hpp"

#include "magpc/errors.hpp"
#include "magpc/random.hpp"

#include <cmath>
#include <numbers>

namespace magpc {

namespace {
constexpr std::uint64_t kPhaseStream = 0x5048415345ULL;
constexpr std::uint64_t kRoundStream = 0x524f554e44ULL;
}  // namespace

std::string_view to_string(DisturbanceKind kind) {
  switch (kind) {
    case DisturbanceKind::kConstant: return "constant";
    case DisturbanceKind::kClippedGaussian: return "clipped-gaussian";
    case DisturbanceKind::kSinusoidal: return "sinusoidal";
    case DisturbanceKind::kSignSwitching: return "sign-switching";
    case DisturbanceKind::kBernoulliScalar: return "bernoulli-scalar";
    case DisturbanceKind::kExplicitSequence: return "explicit-sequence";
  }
  return "constant";
}

DisturbanceKind disturbance_kind_from_string(std::string_view name) {
  for (auto kind : {DisturbanceKind::kConstant, DisturbanceKind::kClippedGaussian,
                    DisturbanceKind::kSinusoidal, DisturbanceKind::kSignSwitching,
                    DisturbanceKind::kBernoulliScalar,
                    DisturbanceKind::kExplicitSequence}) {
    if (to_string(kind) == name) return kind;
  }
  throw ConfigError("unknown disturbance kind '" + std::string(name) + "'");
}

DisturbanceGenerator::DisturbanceGenerator(DisturbanceSpec spec, int d, double W)
    : spec_(std::move(spec)), d_(d), W_(W) {
  if (d_ < 1) throw ConfigError("disturbance dimension must be >= 1");
  if (!(W_ > 0.0)) throw ConfigError("disturbance bound W must be positive");
  const double slack = 1e-12 * W_;
  switch (spec_.kind) {
    case DisturbanceKind::kConstant:
    case DisturbanceKind::kSignSwitching:
      if (spec_.value.size() != d_) throw ConfigError("disturbance vector has wrong dimension");
      if (spec_.value.norm() > W_ + slack) throw ConfigError("disturbance vector exceeds W");
      if (spec_.kind == DisturbanceKind::kSignSwitching && !(spec_.period >= 1.0)) {
        throw ConfigError("sign-switching period must be >= 1");
      }
      break;
    case DisturbanceKind::kClippedGaussian:
      if (spec_.clip < 0.0) spec_.clip = W_;
      if (spec_.clip > W_) throw ConfigError("clip level exceeds the disturbance bound W");
      if (!(spec_.sigma >= 0.0)) throw ConfigError("sigma must be non-negative");
      break;
    case DisturbanceKind::kSinusoidal: {
      if (spec_.amplitude < 0.0 || spec_.amplitude > W_ + slack) {
        throw ConfigError("sinusoidal amplitude must lie in [0, W]");
      }
      if (!(spec_.period > 0.0)) throw ConfigError("sinusoidal period must be positive");
      phases_.resize(d_);
      for (int k = 0; k < d_; ++k) {
        Rng rng(derive_seed(spec_.seed, kPhaseStream, static_cast<std::uint64_t>(k)));
        phases_(k) = 2.0 * std::numbers::pi * rng.uniform();
      }
      break;
    }
    case DisturbanceKind::kBernoulliScalar:
      if (d_ != 1) throw ConfigError("bernoulli-scalar disturbances need d = 1");
      if (std::abs(spec_.amplitude) > W_ + slack) throw ConfigError("bernoulli amplitude exceeds W");
      if (spec_.probability < 0.0 || spec_.probability > 1.0) {
        throw ConfigError("bernoulli probability must lie in [0, 1]");
      }
      break;
    case DisturbanceKind::kExplicitSequence:
      if (spec_.sequence.empty()) throw ConfigError("explicit disturbance sequence is empty");
      for (const auto& v : spec_.sequence) {
        if (v.size() != d_) throw ConfigError("explicit disturbance has wrong dimension");
        if (v.norm() > W_ + slack) throw ConfigError("explicit disturbance exceeds W");
      }
      break;
  }
}

bool DisturbanceGenerator::is_constant() const {
  switch (spec_.kind) {
    case DisturbanceKind::kConstant: return true;
    case DisturbanceKind::kSinusoidal: return spec_.amplitude == 0.0;
    case DisturbanceKind::kClippedGaussian: return spec_.sigma == 0.0 || spec_.clip == 0.0;
    case DisturbanceKind::kSignSwitching: return spec_.value.isZero(0.0);
    case DisturbanceKind::kBernoulliScalar:
      return spec_.amplitude == 0.0 || spec_.probability == 0.0 || spec_.probability == 1.0;
    case DisturbanceKind::kExplicitSequence: {
      for (const auto& v : spec_.sequence) {
        if (v != spec_.sequence.front()) return false;
      }
      return true;
    }
  }
  return false;
}

Vec DisturbanceGenerator::enforce_bound(Vec w) const {
  // Rounding can push a vector a few ulps past W; pull it back inside.
  double n = w.norm();
  if (n > W_) {
    w *= W_ / n;
    while (w.norm() > W_) w *= 1.0 - 0x1.0p-52;
  }
  return w;
}

Vec DisturbanceGenerator::generate(int t) const {
  if (t < 0) throw ConfigError("disturbance round index must be >= 0");
  switch (spec_.kind) {
    case DisturbanceKind::kConstant:
      return enforce_bound(spec_.value);
    case DisturbanceKind::kClippedGaussian: {
      Rng rng(derive_seed(spec_.seed, kRoundStream, static_cast<std::uint64_t>(t)));
      Vec w(d_);
      for (int k = 0; k < d_; ++k) w(k) = spec_.sigma * rng.normal();
      const double n = w.norm();
      if (n > spec_.clip) w *= spec_.clip / n;
      return enforce_bound(std::move(w));
    }
    case DisturbanceKind::kSinusoidal: {
      Vec w(d_);
      const double scale = spec_.amplitude / std::sqrt(static_cast<double>(d_));
      const double arg = 2.0 * std::numbers::pi * static_cast<double>(t) / spec_.period;
      for (int k = 0; k < d_; ++k) w(k) = scale * std::sin(arg + phases_(k));
      return enforce_bound(std::move(w));
    }
    case DisturbanceKind::kSignSwitching: {
      const auto block = static_cast<std::uint64_t>(static_cast<double>(t) / spec_.period);
      Rng rng(derive_seed(spec_.seed, kRoundStream, block));
      const double sign = (rng.next() & 1ULL) ? 1.0 : -1.0;
      return enforce_bound(sign * spec_.value);
    }
    case DisturbanceKind::kBernoulliScalar: {
      Rng rng(derive_seed(spec_.seed, kRoundStream, static_cast<std::uint64_t>(t)));
      Vec w(1);
      w(0) = rng.bernoulli(spec_.probability) ? spec_.amplitude : 0.0;
      return enforce_bound(std::move(w));
    }
    case DisturbanceKind::kExplicitSequence:
      return enforce_bound(spec_.sequence[static_cast<std::size_t>(t) % spec_.sequence.size()]);
  }
  return Vec::Zero(d_);
}

}  // namespace magpc
