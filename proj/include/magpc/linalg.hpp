#pragma once

#include <Eigen/Dense>

#include <vector>

namespace magpc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Operator 2-norm. Empty matrices have norm 0.
double spectral_norm(const Mat& m);

// ||Q|| * ||Q^-1|| for a (possibly complex) square matrix.
double condition_number(const Eigen::MatrixXcd& q);

// Horizontal concatenation [B_1, ..., B_N].
Mat hstack(const std::vector<Mat>& blocks);

// Vertical concatenation (K_1; ...; K_N).
Mat vstack(const std::vector<Mat>& blocks);

}  // namespace magpc
