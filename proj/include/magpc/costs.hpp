#pragma once

#include "magpc/linalg.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace magpc {

// Regularity constants on the ball of radius D: |c| <= beta D^2 and
// ||grad_x c||, ||grad_u c|| <= G D whenever ||x||, ||u|| <= D.
struct CostConstants {
  double beta = 0.0;
  double G = 0.0;
  std::optional<double> Lbar;   // uniform Lipschitz constant
  std::optional<double> zeta;   // smoothness
  std::optional<double> c_inf;  // uniform lower bound
};

// c(z) = 0.5 z^T H z + g^T z + c0 with z = [x; u].
struct QuadraticModel {
  Mat H;
  Vec g;
  double c0 = 0.0;
};

class CostOracle {
 public:
  virtual ~CostOracle() = default;

  virtual int state_dim() const = 0;
  virtual int control_dim() const = 0;
  virtual double value(int t, const Vec& x, const Vec& u) const = 0;
  virtual Vec grad_x(int t, const Vec& x, const Vec& u) const = 0;
  virtual Vec grad_u(int t, const Vec& x, const Vec& u) const = 0;
  virtual CostConstants constants(double D) const = 0;
  virtual std::optional<QuadraticModel> quadratic_model(int /*t*/) const {
    return std::nullopt;
  }
  virtual bool time_invariant() const = 0;
  virtual std::string name() const = 0;
  // max over ||x||, ||u|| <= D of c_{t+1} - c_t when a closed form exists.
  virtual std::optional<double> delta_closed_form(int /*t*/, double /*D*/) const {
    return std::nullopt;
  }
};

struct CostEval {
  double value = 0.0;
  Vec grad_x;
  Vec grad_u;
};

CostEval eval(const CostOracle& oracle, int t, const Vec& x, const Vec& u);

// Time-varying reference signal: constant, sinusoidal around an offset
// (amplitude split evenly over coordinates), or an explicit sequence that
// holds its last value.
class TargetSignal {
 public:
  static TargetSignal constant(Vec value);
  static TargetSignal sinusoidal(Vec offset, double amplitude, double period,
                                 std::uint64_t seed);
  static TargetSignal sequence(std::vector<Vec> values);

  Vec at(int t) const;
  int dim() const { return static_cast<int>(offset_.size()); }
  double sup_norm() const;
  bool frozen() const;

  std::string kind() const { return kind_; }
  const Vec& offset() const { return offset_; }
  double amplitude() const { return amplitude_; }
  double period() const { return period_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<Vec>& values() const { return values_; }

 private:
  std::string kind_ = "constant";
  Vec offset_;
  double amplitude_ = 0.0;
  double period_ = 1.0;
  std::uint64_t seed_ = 0;
  Vec phases_;
  std::vector<Vec> values_;
};

// c_t(x, u) = ||x - a_t||^2 + lambda ||u - b_t||^2
class QuadraticTracking : public CostOracle {
 public:
  QuadraticTracking(TargetSignal a, TargetSignal b, double lambda);

  int state_dim() const override { return a_.dim(); }
  int control_dim() const override { return b_.dim(); }
  double value(int t, const Vec& x, const Vec& u) const override;
  Vec grad_x(int t, const Vec& x, const Vec& u) const override;
  Vec grad_u(int t, const Vec& x, const Vec& u) const override;
  CostConstants constants(double D) const override;
  std::optional<QuadraticModel> quadratic_model(int t) const override;
  bool time_invariant() const override { return a_.frozen() && b_.frozen(); }
  std::string name() const override { return "quadratic-tracking"; }
  std::optional<double> delta_closed_form(int t, double D) const override;

  double lambda() const { return lambda_; }
  const TargetSignal& state_target() const { return a_; }
  const TargetSignal& control_target() const { return b_; }

 private:
  TargetSignal a_;
  TargetSignal b_;
  double lambda_;
};

// c_t(x, u) = u (b_t - 1/2) + 1/2 with b_t ~ Bernoulli(p), scalar u.
class LowerBoundCost : public CostOracle {
 public:
  LowerBoundCost(int state_dim, std::uint64_t seed, double probability = 0.5);
  // Fixed bit sequence (indexed t mod length).
  LowerBoundCost(int state_dim, std::vector<int> bits);

  int bit(int t) const;
  int state_dim() const override { return state_dim_; }
  int control_dim() const override { return 1; }
  double value(int t, const Vec& x, const Vec& u) const override;
  Vec grad_x(int t, const Vec& x, const Vec& u) const override;
  Vec grad_u(int t, const Vec& x, const Vec& u) const override;
  CostConstants constants(double D) const override;
  bool time_invariant() const override { return false; }
  std::string name() const override { return "lower-bound"; }
  std::optional<double> delta_closed_form(int t, double D) const override;

  std::uint64_t seed() const { return seed_; }
  double probability() const { return probability_; }

 private:
  int state_dim_;
  std::uint64_t seed_ = 0;
  double probability_ = 0.5;
  std::vector<int> bits_;
};

// c(x, u) = <gx, x> + <gu, u> + c0
class LinearCost : public CostOracle {
 public:
  LinearCost(Vec gx, Vec gu, double c0 = 0.0);

  int state_dim() const override { return static_cast<int>(gx_.size()); }
  int control_dim() const override { return static_cast<int>(gu_.size()); }
  double value(int t, const Vec& x, const Vec& u) const override;
  Vec grad_x(int t, const Vec& x, const Vec& u) const override;
  Vec grad_u(int t, const Vec& x, const Vec& u) const override;
  CostConstants constants(double D) const override;
  std::optional<QuadraticModel> quadratic_model(int t) const override;
  bool time_invariant() const override { return true; }
  std::string name() const override { return "linear"; }
  std::optional<double> delta_closed_form(int, double) const override { return 0.0; }

 private:
  Vec gx_;
  Vec gu_;
  double c0_;
};

struct DeltaCost {
  double value = 0.0;
  bool estimate = false;  // true when only a sampled lower estimate exists
};

// max over ||x||, ||u|| <= D of c_{t+1}(x,u) - c_t(x,u).
DeltaCost delta_cost(const CostOracle& oracle, int t, double D,
                     std::uint64_t seed = 0, int samples = 10000);
double delta_cost_sampled(const CostOracle& oracle, int t, double D,
                          std::uint64_t seed, int samples = 10000);

// Who pays what: either one oracle per agent evaluated on (x, u^i), or one
// shared oracle evaluated on (x, [u^1; ...; u^N]) (common interest).
struct CostAssignment {
  std::vector<std::shared_ptr<const CostOracle>> per_agent;
  std::shared_ptr<const CostOracle> shared;

  bool joint() const { return shared != nullptr; }
  const CostOracle& oracle(int i) const { return joint() ? *shared : *per_agent.at(i); }
  double agent_cost(int i, int t, const Vec& x, const std::vector<Vec>& u) const;
};

Vec concat(const std::vector<Vec>& parts);

}  // namespace magpc
