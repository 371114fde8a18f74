#pragma once

// Closed-form magnitude bounds for all-DAC play under a global (kappa, gamma)
// certificate with parameter radii tau (1 - gamma)^p. States start at zero.

namespace magpc {

struct BoundInputs {
  double kappa = 1.0;
  double gamma = 0.5;
  double W = 1.0;
  double sum_B = 1.0;  // sum_i ||B_i||
  double max_B = 1.0;  // max_i ||B_i||
  int H = 1;
  int d = 1;
  double tau = 2.0;
};

// D = 6 kappa^3 / gamma * W (1 + kappa^2 H sum_B)
double uniform_radius(const BoundInputs& in);

// Transfer-matrix bound for lag l.
double transfer_norm_bound(const BoundInputs& in, int l);

// True when H + 1 >= ln(2 kappa) / gamma, the regime where the uniform
// radius dominates every individual bound below.
bool memory_long_enough(const BoundInputs& in);

struct MagnitudeBounds {
  double state = 0.0;            // ||x_t||
  double ideal_state = 0.0;      // ||y_t||
  double linear_state = 0.0;     // ||x_t|| under the linear controller alone
  double action = 0.0;           // ||u_t^i||
  double ideal_action = 0.0;     // ||v_t^i||
  double state_deviation = 0.0;  // ||x_t - y_t||
  double action_deviation = 0.0; // ||u_t^i - v_t^i||
  double D = 0.0;
  double uniform_deviation = 0.0;  // (1 - gamma)^H D
};

// Valid for t >= H + 1; `state`, `action` and the deviations need
// kappa (1 - gamma)^{H+1} < 1 (infinite otherwise).
MagnitudeBounds magnitude_bounds(const BoundInputs& in);

// Coordinate-wise Lipschitz constant of the windowed loss in one slot.
double coordinate_lipschitz(const BoundInputs& in, double G, double D);

// Frobenius bound on the surrogate gradient.
double gradient_norm_bound(const BoundInputs& in, double G, double D);

// |c_t(x_t, u_t) - l_t| <= 2 G D^2 (1 - gamma)^H
double surrogate_deviation_bound(const BoundInputs& in, double G, double D);

}  // namespace magpc
