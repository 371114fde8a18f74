#include "magpc/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace magpc {

double uniform_radius(const BoundInputs& in) {
  const double k = in.kappa;
  return 6.0 * k * k * k / in.gamma * in.W * (1.0 + k * k * in.H * in.sum_B);
}

double transfer_norm_bound(const BoundInputs& in, int l) {
  const double rho = 1.0 - in.gamma;
  const double direct = l <= in.H ? in.kappa * std::pow(rho, l) : 0.0;
  return direct + in.H * in.kappa * in.tau * in.sum_B * std::pow(rho, l - 1);
}

bool memory_long_enough(const BoundInputs& in) {
  return in.H + 1 >= std::log(2.0 * in.kappa) / in.gamma;
}

MagnitudeBounds magnitude_bounds(const BoundInputs& in) {
  const double k = in.kappa;
  const double g = in.gamma;
  const double rho_H = std::pow(1.0 - g, in.H);
  const double base = in.W * (1.0 + in.tau * in.H * in.sum_B);
  const double denom = 1.0 - k * (1.0 - g) * rho_H;
  const double inf = std::numeric_limits<double>::infinity();
  MagnitudeBounds b;
  b.state = denom > 0.0 ? k / g * base / denom : inf;
  b.ideal_state = k / g * base;
  b.linear_state = k / g * in.W;
  b.action = denom > 0.0 ? k * k / g * base / denom + in.tau / g * in.W : inf;
  b.ideal_action = k * k / g * base + in.tau / g * in.W;
  b.state_deviation = denom > 0.0 ? rho_H * k * k / g * base / denom : inf;
  b.action_deviation = denom > 0.0 ? rho_H * k * k * k / g * base / denom : inf;
  b.D = uniform_radius(in);
  b.uniform_deviation = rho_H * b.D;
  return b;
}

double coordinate_lipschitz(const BoundInputs& in, double G, double D) {
  // The slot holding the current parameter enters the action directly with
  // weight W, so the kappa^2 max_B factor is floored at 1.
  return 2.0 * G * D * in.W * std::max(in.kappa * in.kappa * in.max_B, 1.0);
}

double gradient_norm_bound(const BoundInputs& in, double G, double D) {
  return G * D * std::sqrt(static_cast<double>(in.H)) * in.d * in.W *
         (1.0 + 2.0 * in.kappa * in.kappa * in.max_B / in.gamma);
}

double surrogate_deviation_bound(const BoundInputs& in, double G, double D) {
  return 2.0 * G * D * D * std::pow(1.0 - in.gamma, in.H);
}

}  // namespace magpc
