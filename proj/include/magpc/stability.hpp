#pragma once

#include "magpc/linalg.hpp"

#include <vector>

namespace magpc {

// Witness that A_cl = Q Lmat Q^{-1} with ||Lmat|| <= 1 - gamma and
// ||Q|| ||Q^{-1}||, ||K|| <= kappa.
struct StabilityCertificate {
  double kappa = 1.0;
  double gamma = 0.5;
  Eigen::MatrixXcd Q;
  Eigen::MatrixXcd Lmat;
  double residual = 0.0;
  double spectral_radius = 0.0;
  double condition = 1.0;   // ||Q|| ||Q^{-1}|| as measured
  double gain_norm = 0.0;   // ||K|| as measured
  bool overridden = false;  // (kappa, gamma) loosened by the user
};

inline constexpr double kGammaClamp = 1e-6;
inline constexpr double kMaxCondition = 1e8;

// Eigenvector certificate of A - B K.
StabilityCertificate certify(const Mat& A, const Mat& B, const Mat& K);

// Certificate of A - sum_i B_i K_i.
StabilityCertificate certify_global(const Mat& A, const std::vector<Mat>& B,
                                    const std::vector<Mat>& K);

// Replace (kappa, gamma) by looser user values; throws ConfigError if the
// stored witness does not support them.
StabilityCertificate with_override(StabilityCertificate cert, double kappa, double gamma);

// Re-derives the three inequalities from the stored fields.
bool validate_certificate(const StabilityCertificate& cert, const Mat& A_cl, const Mat& K,
                          double tol = 1e-9);

// Infinite-horizon discrete LQR gain with identity weights (value iteration).
Mat synthesize(const Mat& A, const Mat& B, int max_sweeps = 10000, double tol = 1e-12);

}  // namespace magpc
