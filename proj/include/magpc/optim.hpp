#pragma once

#include "magpc/linalg.hpp"

#include <cstdint>
#include <functional>

namespace magpc {

struct ProjectedGradientOptions {
  int max_iters = 20000;
  double tol = 1e-8;     // absolute, on the gradient-mapping norm
  double L = 0.0;        // fixed smoothness; 0 selects backtracking
  bool accelerate = true;
};

struct ProjectedGradientResult {
  Vec x;
  double f = 0.0;
  int iterations = 0;
  double grad_mapping = 0.0;
  bool converged = false;
};

// Accelerated projected gradient with function-value restarts.
ProjectedGradientResult projected_gradient(const std::function<double(const Vec&)>& f,
                                           const std::function<Vec(const Vec&)>& grad,
                                           const std::function<Vec(const Vec&)>& proj, Vec x0,
                                           const ProjectedGradientOptions& opts);

// Largest eigenvalue of a symmetric PSD matrix by power iteration.
double power_iteration(const Mat& Q, int iters = 300, std::uint64_t seed = 1);

}  // namespace magpc
