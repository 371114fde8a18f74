#include "magpc/optim.hpp"

#include "magpc/random.hpp"

#include <algorithm>
#include <cmath>

namespace magpc {

ProjectedGradientResult projected_gradient(const std::function<double(const Vec&)>& f,
                                           const std::function<Vec(const Vec&)>& grad,
                                           const std::function<Vec(const Vec&)>& proj, Vec x0,
                                           const ProjectedGradientOptions& opts) {
  const bool fixed = opts.L > 0.0;
  double L = fixed ? opts.L : 1.0;
  ProjectedGradientResult res;
  Vec x = proj(x0);
  double fx = f(x);
  Vec y = x;
  double t = 1.0;
  double gm = 0.0;
  for (int it = 0; it < opts.max_iters; ++it) {
    res.iterations = it + 1;
    const Vec gy = grad(y);
    const double fy = f(y);
    Vec xn;
    double fxn = 0.0;
    for (;;) {
      xn = proj(y - gy / L);
      fxn = f(xn);
      if (fixed) break;
      const Vec dlt = xn - y;
      if (fxn <= fy + gy.dot(dlt) + 0.5 * L * dlt.squaredNorm() + 1e-13 * (1.0 + std::abs(fy))) break;
      L *= 2.0;
      if (!std::isfinite(L)) break;
    }
    gm = L * (xn - y).norm();
    if (gm <= opts.tol) {
      if (fxn <= fx) {
        x = xn;
        fx = fxn;
      }
      res.converged = true;
      break;
    }
    if (fxn > fx) {
      // Momentum overshot: restart from the best point.
      if ((y - x).squaredNorm() == 0.0) {
        // Plain step failed to descend (only from rounding); stop here.
        res.converged = gm <= opts.tol * 10.0;
        break;
      }
      y = x;
      t = 1.0;
      continue;
    }
    if (opts.accelerate) {
      const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      y = xn + ((t - 1.0) / tn) * (xn - x);
      t = tn;
    } else {
      y = xn;
    }
    x = std::move(xn);
    fx = fxn;
  }
  const Vec gx = grad(x);
  res.grad_mapping = L * (proj(x - gx / L) - x).norm();
  res.converged = res.converged || res.grad_mapping <= opts.tol;
  res.x = std::move(x);
  res.f = fx;
  return res;
}

double power_iteration(const Mat& Q, int iters, std::uint64_t seed) {
  const Eigen::Index n = Q.rows();
  if (n == 0) return 0.0;
  Rng rng(seed);
  Vec v(n);
  for (Eigen::Index k = 0; k < n; ++k) v(k) = rng.normal();
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < iters; ++it) {
    Vec w = Q * v;
    const double nw = w.norm();
    if (nw == 0.0) return 0.0;
    const double next = v.dot(w);
    v = w / nw;
    if (it > 10 && std::abs(next - lambda) <= 1e-12 * std::abs(next)) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return std::max(lambda, (Q * v).norm());
}

}  // namespace magpc
