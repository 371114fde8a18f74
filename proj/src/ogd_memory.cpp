#include "magpc/ogd_memory.hpp"

#include "magpc/errors.hpp"
#include "magpc/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace magpc {

double MemoryLoss::value_diag(int t, const Vec& x) const {
  return value(t, std::vector<Vec>(static_cast<std::size_t>(memory() + 1), x));
}

Projector ball_projector(double radius) {
  return [radius](const Vec& x) -> Vec {
    const double n = x.norm();
    return n <= radius ? x : Vec(x * (radius / n));
  };
}

OgdMemoryResult ogd_with_memory(const MemoryLoss& losses, const Projector& proj,
                                const Vec& x_init, double eta, int T,
                                const ComparatorOptions& opts) {
  const int H = losses.memory();
  if (H < 0 || T <= H) throw ConfigError("horizon must exceed the loss memory");
  if (!(eta >= 0.0)) throw ConfigError("step size must be >= 0");
  OgdMemoryResult res;
  res.iterates.assign(static_cast<std::size_t>(H + 1), x_init);
  std::vector<Vec> window(static_cast<std::size_t>(H + 1));
  for (int t = H; t < T; ++t) {
    for (int j = 0; j <= H; ++j) window[static_cast<std::size_t>(j)] = res.iterates[static_cast<std::size_t>(t - j)];
    res.realized += losses.value(t, window);
    const Vec& xt = res.iterates.back();
    res.iterates.push_back(proj(xt - eta * losses.grad_diag(t, xt)));
  }

  // Offline comparator: projected gradient descent with backtracking on the
  // convex total diagonal loss.
  auto total = [&](const Vec& x) {
    double s = 0.0;
    for (int t = H; t < T; ++t) s += losses.value_diag(t, x);
    return s;
  };
  auto total_grad = [&](const Vec& x) {
    Vec g = Vec::Zero(x.size());
    for (int t = H; t < T; ++t) g += losses.grad_diag(t, x);
    return g;
  };
  // The step only shrinks: letting it grow again lets rounding-level slack in
  // the acceptance test admit overshoots that bounce around the minimizer.
  auto solve_from = [&](Vec x, int& iters) {
    double f = total(x);
    double step = 1.0;
    double scale = 0.0;
    for (iters = 0; iters < opts.max_iters; ++iters) {
      const Vec g = total_grad(x);
      if (iters == 0) scale = std::max(1.0, g.norm());
      Vec next;
      double fn = 0.0;
      for (;;) {
        next = proj(x - step * g);
        fn = total(next);
        const Vec diff = next - x;
        if (fn <= f + g.dot(diff) + diff.squaredNorm() / (2.0 * step) + 1e-14 * std::abs(f)) break;
        step *= 0.5;
        if (step < 1e-300) break;
      }
      const double move = (next - x).norm() / step;
      if (fn >= f) break;
      x = std::move(next);
      f = fn;
      if (move <= opts.tol * scale) break;
    }
    return std::pair<Vec, double>(x, f);
  };
  int it_a = 0, it_b = 0;
  auto a = solve_from(x_init, it_a);
  auto b = solve_from(res.iterates.back(), it_b);
  const bool use_a = a.second <= b.second;
  res.comparator_x = use_a ? a.first : b.first;
  res.comparator = use_a ? a.second : b.second;
  res.comparator_iters = use_a ? it_a : it_b;
  res.regret = res.realized - res.comparator;
  return res;
}

double ogd_memory_bound(double D0, double G0, double L, int H, double eta, int T) {
  return D0 * D0 / eta + (G0 * G0 + L * H * H * G0) * eta * T;
}

SyntheticMemoryLoss::SyntheticMemoryLoss(Vec alpha, int dim, double R, double C,
                                         std::uint64_t seed)
    : alpha_(std::move(alpha)), dim_(dim), R_(R), C_(C), seed_(seed) {
  if (alpha_.size() < 1 || dim_ < 1 || !(R_ > 0.0) || C_ < 0.0) {
    throw ConfigError("invalid synthetic memory loss");
  }
  if ((alpha_.array() < 0.0).any()) throw ConfigError("memory weights must be non-negative");
}

Vec SyntheticMemoryLoss::target(int t) const {
  // Stateless per-round draws: a full engine reseed per call dominated the
  // comparator solve, which evaluates every target many times.
  const std::uint64_t base = derive_seed(seed_, 0x43544152ULL, static_cast<std::uint64_t>(t));
  auto unit = [&](std::uint64_t k) {
    return static_cast<double>(splitmix64(base + k) >> 11) * 0x1.0p-53;
  };
  Vec c(dim_);
  for (int k = 0; k < dim_; ++k) {
    const double u1 = 1.0 - unit(2 * static_cast<std::uint64_t>(k));
    const double u2 = unit(2 * static_cast<std::uint64_t>(k) + 1);
    c(k) = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }
  const double n = c.norm();
  const double r = C_ * unit(2 * static_cast<std::uint64_t>(dim_));
  return n > 0.0 ? Vec(c * (r / n)) : Vec(Vec::Zero(dim_));
}

double SyntheticMemoryLoss::value(int t, const std::vector<Vec>& window) const {
  Vec s = -target(t);
  for (Eigen::Index j = 0; j < alpha_.size(); ++j) s += alpha_(j) * window.at(static_cast<std::size_t>(j));
  return 0.5 * s.squaredNorm();
}

Vec SyntheticMemoryLoss::grad_diag(int t, const Vec& x) const {
  const double a = alpha_.sum();
  return a * (a * x - target(t));
}

double SyntheticMemoryLoss::gradient_bound() const {
  const double a = alpha_.sum();
  return a * (a * R_ + C_);
}

double SyntheticMemoryLoss::lipschitz() const {
  const double a = alpha_.sum();
  return alpha_.maxCoeff() * (a * R_ + C_);
}

}  // namespace magpc
