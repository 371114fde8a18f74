#pragma once

#include "magpc/linalg.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace magpc {

// Convex loss of the last H+1 iterates. window[j] = x_{t-j}, j = 0..H.
class MemoryLoss {
 public:
  virtual ~MemoryLoss() = default;
  virtual int dim() const = 0;
  virtual int memory() const = 0;
  virtual double value(int t, const std::vector<Vec>& window) const = 0;
  // Gradient of x -> value(t, {x, ..., x}).
  virtual Vec grad_diag(int t, const Vec& x) const = 0;
  double value_diag(int t, const Vec& x) const;
};

using Projector = std::function<Vec(const Vec&)>;

Projector ball_projector(double radius);

struct ComparatorOptions {
  int max_iters = 20000;
  double tol = 1e-10;
};

struct OgdMemoryResult {
  std::vector<Vec> iterates;  // x_0..x_T
  double realized = 0.0;      // sum_{t=H}^{T-1} l_t(x_{t-H..t})
  double comparator = 0.0;    // min_x sum_t l_t(x, ..., x)
  double regret = 0.0;
  Vec comparator_x;
  int comparator_iters = 0;
};

// x_0 = ... = x_H = x_init; for t = H..T-1 pay l_t on the window, then
// x_{t+1} = P(x_t - eta grad l_t(x_t, ..., x_t)).
OgdMemoryResult ogd_with_memory(const MemoryLoss& losses, const Projector& proj,
                                const Vec& x_init, double eta, int T,
                                const ComparatorOptions& opts = {});

// D_0^2 / eta + (G_0^2 + L H^2 G_0) eta T
double ogd_memory_bound(double D0, double G0, double L, int H, double eta, int T);

// l_t = 0.5 || sum_j alpha_j x_{t-j} - c_t ||^2 on the ball of radius R, with
// seeded targets ||c_t|| <= C.
class SyntheticMemoryLoss : public MemoryLoss {
 public:
  SyntheticMemoryLoss(Vec alpha, int dim, double R, double C, std::uint64_t seed);

  int dim() const override { return dim_; }
  int memory() const override { return static_cast<int>(alpha_.size()) - 1; }
  double value(int t, const std::vector<Vec>& window) const override;
  Vec grad_diag(int t, const Vec& x) const override;
  Vec target(int t) const;

  double radius() const { return R_; }
  double diameter() const { return 2.0 * R_; }
  // sup of ||grad l_t(x, ..., x)|| over the ball.
  double gradient_bound() const;
  // Coordinate-wise Lipschitz constant over the ball.
  double lipschitz() const;

 private:
  Vec alpha_;
  int dim_;
  double R_;
  double C_;
  std::uint64_t seed_;
};

}  // namespace magpc
