#pragma once

#include "magpc/linalg.hpp"
#include "magpc/random.hpp"

namespace magpc::testing {

inline Mat random_matrix(Rng& rng, int r, int c, double scale = 1.0) {
  Mat m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = scale * rng.normal();
  return m;
}

inline Vec random_vector(Rng& rng, int n, double scale = 1.0) {
  return random_matrix(rng, n, 1, scale);
}

// Scales a square matrix to the requested spectral radius.
inline Mat with_spectral_radius(Mat A, double rho) {
  const double r = Eigen::EigenSolver<Mat>(A, false).eigenvalues().cwiseAbs().maxCoeff();
  return r > 1e-12 ? Mat(A * (rho / r)) : A;
}

}  // namespace magpc::testing
