#include "magpc/costs.hpp"

#include "magpc/errors.hpp"
#include "magpc/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace magpc {

namespace {
constexpr std::uint64_t kTargetPhaseStream = 0x544152474554ULL;
constexpr std::uint64_t kBitStream = 0x42495453ULL;
constexpr std::uint64_t kSphereStream = 0x535048455245ULL;

void check_dims(const CostOracle& c, const Vec& x, const Vec& u) {
  if (x.size() != c.state_dim()) throw DimensionError(c.name() + ": state has wrong dimension");
  if (u.size() != c.control_dim()) throw DimensionError(c.name() + ": control has wrong dimension");
}

Vec random_sphere(Rng& rng, int n, double radius) {
  Vec v(n);
  double norm = 0.0;
  while (norm == 0.0) {
    for (int k = 0; k < n; ++k) v(k) = rng.normal();
    norm = v.norm();
  }
  return v * (radius / norm);
}
}  // namespace

CostEval eval(const CostOracle& oracle, int t, const Vec& x, const Vec& u) {
  check_dims(oracle, x, u);
  return {oracle.value(t, x, u), oracle.grad_x(t, x, u), oracle.grad_u(t, x, u)};
}

TargetSignal TargetSignal::constant(Vec value) {
  TargetSignal s;
  s.kind_ = "constant";
  s.offset_ = std::move(value);
  return s;
}

TargetSignal TargetSignal::sinusoidal(Vec offset, double amplitude, double period,
                                      std::uint64_t seed) {
  if (!(period > 0.0)) throw ConfigError("target period must be positive");
  if (amplitude < 0.0) throw ConfigError("target amplitude must be non-negative");
  TargetSignal s;
  s.kind_ = "sinusoidal";
  s.offset_ = std::move(offset);
  s.amplitude_ = amplitude;
  s.period_ = period;
  s.seed_ = seed;
  s.phases_.resize(s.offset_.size());
  for (Eigen::Index k = 0; k < s.offset_.size(); ++k) {
    Rng rng(derive_seed(seed, kTargetPhaseStream, static_cast<std::uint64_t>(k)));
    s.phases_(k) = 2.0 * std::numbers::pi * rng.uniform();
  }
  return s;
}

TargetSignal TargetSignal::sequence(std::vector<Vec> values) {
  if (values.empty()) throw ConfigError("target sequence is empty");
  TargetSignal s;
  s.kind_ = "sequence";
  s.offset_ = Vec::Zero(values.front().size());
  for (const auto& v : values) {
    if (v.size() != s.offset_.size()) throw ConfigError("target sequence has mixed dimensions");
  }
  s.values_ = std::move(values);
  return s;
}

Vec TargetSignal::at(int t) const {
  if (kind_ == "sequence") {
    const auto idx = std::min<std::size_t>(static_cast<std::size_t>(std::max(t, 0)),
                                           values_.size() - 1);
    return values_[idx];
  }
  if (kind_ == "constant" || amplitude_ == 0.0) return offset_;
  Vec a = offset_;
  const double scale = amplitude_ / std::sqrt(static_cast<double>(offset_.size()));
  const double arg = 2.0 * std::numbers::pi * static_cast<double>(t) / period_;
  for (Eigen::Index k = 0; k < a.size(); ++k) a(k) += scale * std::sin(arg + phases_(k));
  return a;
}

double TargetSignal::sup_norm() const {
  if (kind_ == "sequence") {
    double s = 0.0;
    for (const auto& v : values_) s = std::max(s, v.norm());
    return s;
  }
  return offset_.norm() + amplitude_;
}

bool TargetSignal::frozen() const {
  if (kind_ == "sequence") {
    return std::all_of(values_.begin(), values_.end(),
                       [&](const Vec& v) { return v == values_.front(); });
  }
  return kind_ == "constant" || amplitude_ == 0.0;
}

QuadraticTracking::QuadraticTracking(TargetSignal a, TargetSignal b, double lambda)
    : a_(std::move(a)), b_(std::move(b)), lambda_(lambda) {
  if (!(lambda_ >= 0.0)) throw ConfigError("tracking weight lambda must be >= 0");
  if (a_.dim() < 1 || b_.dim() < 1) throw ConfigError("tracking targets must be non-empty");
}

double QuadraticTracking::value(int t, const Vec& x, const Vec& u) const {
  return (x - a_.at(t)).squaredNorm() + lambda_ * (u - b_.at(t)).squaredNorm();
}

Vec QuadraticTracking::grad_x(int t, const Vec& x, const Vec&) const {
  return 2.0 * (x - a_.at(t));
}

Vec QuadraticTracking::grad_u(int t, const Vec&, const Vec& u) const {
  return 2.0 * lambda_ * (u - b_.at(t));
}

CostConstants QuadraticTracking::constants(double D) const {
  if (!(D > 0.0)) throw ConfigError("ball radius D must be positive");
  const double s = std::max(a_.sup_norm(), b_.sup_norm());
  const double r = 1.0 + s / D;
  CostConstants c;
  // |x - a|^2 + lambda |u - b|^2 <= (1 + lambda)(D + s)^2 on the ball.
  c.beta = (1.0 + lambda_) * r * r;
  c.G = 2.0 * std::max(1.0, lambda_) * r;
  c.zeta = 2.0 * std::max(1.0, lambda_);
  c.c_inf = 0.0;
  return c;
}

std::optional<QuadraticModel> QuadraticTracking::quadratic_model(int t) const {
  const int n = state_dim();
  const int m = control_dim();
  QuadraticModel q;
  q.H = Mat::Zero(n + m, n + m);
  q.H.topLeftCorner(n, n).diagonal().setConstant(2.0);
  q.H.bottomRightCorner(m, m).diagonal().setConstant(2.0 * lambda_);
  const Vec a = a_.at(t);
  const Vec b = b_.at(t);
  q.g.resize(n + m);
  q.g.head(n) = -2.0 * a;
  q.g.tail(m) = -2.0 * lambda_ * b;
  q.c0 = a.squaredNorm() + lambda_ * b.squaredNorm();
  return q;
}

std::optional<double> QuadraticTracking::delta_closed_form(int t, double D) const {
  // The difference of the two quadratics is affine in (x, u); its max over the
  // product of balls sits on the boundary along the shift directions.
  const Vec a0 = a_.at(t), a1 = a_.at(t + 1);
  const Vec b0 = b_.at(t), b1 = b_.at(t + 1);
  const double state_part = 2.0 * D * (a1 - a0).norm() + a1.squaredNorm() - a0.squaredNorm();
  const double control_part =
      2.0 * D * (b1 - b0).norm() + b1.squaredNorm() - b0.squaredNorm();
  return state_part + lambda_ * control_part;
}

LowerBoundCost::LowerBoundCost(int state_dim, std::uint64_t seed, double probability)
    : state_dim_(state_dim), seed_(seed), probability_(probability) {
  if (state_dim_ < 1) throw ConfigError("state dimension must be >= 1");
  if (probability_ < 0.0 || probability_ > 1.0) throw ConfigError("probability must lie in [0,1]");
}

LowerBoundCost::LowerBoundCost(int state_dim, std::vector<int> bits)
    : state_dim_(state_dim), bits_(std::move(bits)) {
  if (bits_.empty()) throw ConfigError("bit sequence is empty");
  for (int b : bits_) {
    if (b != 0 && b != 1) throw ConfigError("bits must be 0 or 1");
  }
}

int LowerBoundCost::bit(int t) const {
  if (!bits_.empty()) return bits_[static_cast<std::size_t>(t) % bits_.size()];
  Rng rng(derive_seed(seed_, kBitStream, static_cast<std::uint64_t>(t)));
  return rng.bernoulli(probability_) ? 1 : 0;
}

double LowerBoundCost::value(int t, const Vec&, const Vec& u) const {
  return u(0) * (bit(t) - 0.5) + 0.5;
}

Vec LowerBoundCost::grad_x(int, const Vec&, const Vec&) const {
  return Vec::Zero(state_dim_);
}

Vec LowerBoundCost::grad_u(int t, const Vec&, const Vec&) const {
  return Vec::Constant(1, bit(t) - 0.5);
}

CostConstants LowerBoundCost::constants(double D) const {
  if (!(D > 0.0)) throw ConfigError("ball radius D must be positive");
  CostConstants c;
  c.beta = (D + 1.0) / (2.0 * D * D);
  c.G = 0.5 / D;
  c.Lbar = 0.5;
  c.zeta = 0.0;
  return c;
}

std::optional<double> LowerBoundCost::delta_closed_form(int t, double D) const {
  return D * std::abs(bit(t + 1) - bit(t));
}

LinearCost::LinearCost(Vec gx, Vec gu, double c0)
    : gx_(std::move(gx)), gu_(std::move(gu)), c0_(c0) {}

double LinearCost::value(int, const Vec& x, const Vec& u) const {
  return gx_.dot(x) + gu_.dot(u) + c0_;
}

Vec LinearCost::grad_x(int, const Vec&, const Vec&) const { return gx_; }
Vec LinearCost::grad_u(int, const Vec&, const Vec&) const { return gu_; }

CostConstants LinearCost::constants(double D) const {
  if (!(D > 0.0)) throw ConfigError("ball radius D must be positive");
  CostConstants c;
  c.beta = (gx_.norm() + gu_.norm()) / D + std::abs(c0_) / (D * D);
  c.G = std::max(gx_.norm(), gu_.norm()) / D;
  c.Lbar = std::sqrt(gx_.squaredNorm() + gu_.squaredNorm());
  c.zeta = 0.0;
  return c;
}

std::optional<QuadraticModel> LinearCost::quadratic_model(int) const {
  const Eigen::Index n = gx_.size() + gu_.size();
  QuadraticModel q;
  q.H = Mat::Zero(n, n);
  q.g.resize(n);
  q.g << gx_, gu_;
  q.c0 = c0_;
  return q;
}

double delta_cost_sampled(const CostOracle& oracle, int t, double D,
                          std::uint64_t seed, int samples) {
  Rng rng(derive_seed(seed, kSphereStream, static_cast<std::uint64_t>(t)));
  double best = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    const Vec x = random_sphere(rng, oracle.state_dim(), D);
    const Vec u = random_sphere(rng, oracle.control_dim(), D);
    best = std::max(best, oracle.value(t + 1, x, u) - oracle.value(t, x, u));
  }
  return best;
}

DeltaCost delta_cost(const CostOracle& oracle, int t, double D, std::uint64_t seed,
                     int samples) {
  if (!(D > 0.0)) throw ConfigError("ball radius D must be positive");
  if (oracle.time_invariant()) return {0.0, false};
  if (auto closed = oracle.delta_closed_form(t, D)) return {*closed, false};
  return {delta_cost_sampled(oracle, t, D, seed, samples), true};
}

double CostAssignment::agent_cost(int i, int t, const Vec& x,
                                  const std::vector<Vec>& u) const {
  if (joint()) return shared->value(t, x, concat(u));
  return per_agent.at(i)->value(t, x, u.at(i));
}

Vec concat(const std::vector<Vec>& parts) {
  Eigen::Index n = 0;
  for (const auto& p : parts) n += p.size();
  Vec out(n);
  Eigen::Index o = 0;
  for (const auto& p : parts) {
    out.segment(o, p.size()) = p;
    o += p.size();
  }
  return out;
}

}  // namespace magpc
