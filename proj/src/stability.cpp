#include "magpc/stability.hpp"

#include "magpc/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace magpc {

namespace {

double complex_spectral_norm(const Eigen::MatrixXcd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  return svd.singularValues()(0);
}

StabilityCertificate certify_closed_loop(const Mat& A_cl, const Mat& K) {
  Eigen::ComplexEigenSolver<Mat> es(A_cl);
  if (es.info() != Eigen::Success) throw NumericError("eigendecomposition failed");
  const Eigen::VectorXcd lambda = es.eigenvalues();
  const double rho = lambda.cwiseAbs().maxCoeff();
  if (rho >= 1.0) {
    std::ostringstream msg;
    msg << "closed loop is not stabilizing (spectral radius " << rho << ")";
    throw NotStabilizingError(msg.str(), rho);
  }
  StabilityCertificate cert;
  cert.Q = es.eigenvectors();
  cert.condition = condition_number(cert.Q);
  if (!(cert.condition <= kMaxCondition)) {
    std::ostringstream msg;
    msg << "closed loop is numerically defective (eigenvector condition number "
        << cert.condition << "); perturb A slightly to split repeated eigenvalues";
    throw DefectiveMatrixError(msg.str(), cert.condition);
  }
  cert.Lmat = lambda.asDiagonal();
  cert.spectral_radius = rho;
  cert.gamma = std::min(1.0 - rho, 1.0 - kGammaClamp);
  cert.gain_norm = spectral_norm(K);
  cert.kappa = std::max({cert.gain_norm, cert.condition, 1.0});
  const Eigen::MatrixXcd recon = cert.Q * cert.Lmat * cert.Q.inverse();
  cert.residual = complex_spectral_norm(recon - A_cl.cast<std::complex<double>>());
  return cert;
}

}  // namespace

StabilityCertificate certify(const Mat& A, const Mat& B, const Mat& K) {
  if (A.rows() != A.cols()) throw DimensionError("A must be square");
  if (B.rows() != A.rows()) throw DimensionError("B must have as many rows as A");
  if (K.rows() != B.cols() || K.cols() != A.cols()) {
    throw DimensionError("K must be k x d");
  }
  return certify_closed_loop(A - B * K, K);
}

StabilityCertificate certify_global(const Mat& A, const std::vector<Mat>& B,
                                    const std::vector<Mat>& K) {
  if (B.size() != K.size() || B.empty()) {
    throw DimensionError("need one gain per agent");
  }
  for (std::size_t i = 0; i < B.size(); ++i) {
    if (B[i].rows() != A.rows()) throw DimensionError("B_i has wrong row count", static_cast<int>(i));
    if (K[i].rows() != B[i].cols() || K[i].cols() != A.cols()) {
      throw DimensionError("K_i must be k_i x d", static_cast<int>(i));
    }
  }
  return certify(A, hstack(B), vstack(K));
}

StabilityCertificate with_override(StabilityCertificate cert, double kappa, double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma override must lie in (0, 1)");
  if (kappa < std::max({cert.gain_norm, cert.condition, 1.0}) - 1e-12) {
    throw ConfigError("kappa override is below what the certificate witnesses");
  }
  const double lnorm = complex_spectral_norm(cert.Lmat);
  if (lnorm > 1.0 - gamma + 1e-12) {
    throw ConfigError("gamma override is not supported by the closed-loop spectrum");
  }
  cert.kappa = kappa;
  cert.gamma = gamma;
  cert.overridden = true;
  return cert;
}

bool validate_certificate(const StabilityCertificate& cert, const Mat& A_cl, const Mat& K,
                          double tol) {
  const double cond = complex_spectral_norm(cert.Q) * complex_spectral_norm(cert.Q.inverse());
  const double lnorm = complex_spectral_norm(cert.Lmat);
  const Eigen::MatrixXcd recon = cert.Q * cert.Lmat * cert.Q.inverse();
  const double residual = complex_spectral_norm(recon - A_cl.cast<std::complex<double>>());
  return spectral_norm(K) <= cert.kappa + tol && cond <= cert.kappa * (1.0 + tol) &&
         lnorm <= 1.0 - cert.gamma + tol && residual <= 1e-8;
}

Mat synthesize(const Mat& A, const Mat& B, int max_sweeps, double tol) {
  if (A.rows() != A.cols() || B.rows() != A.rows()) {
    throw DimensionError("synthesize: incompatible A, B");
  }
  const Eigen::Index d = A.rows();
  const Eigen::Index k = B.cols();
  const Mat Qw = Mat::Identity(d, d);
  const Mat Rw = Mat::Identity(k, k);
  Mat P = Qw;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    const Mat BtP = B.transpose() * P;
    const Mat gain = (Rw + BtP * B).ldlt().solve(BtP * A);
    Mat next = Qw + A.transpose() * P * A - A.transpose() * P * B * gain;
    next = 0.5 * (next + next.transpose());
    if (!next.allFinite()) break;
    const double change = (next - P).norm();
    P = std::move(next);
    if (change <= tol * std::max(1.0, P.norm())) {
      const Mat BtPf = B.transpose() * P;
      return (Rw + BtPf * B).ldlt().solve(BtPf * A);
    }
  }
  throw NumericError("Riccati iteration did not converge within " +
                     std::to_string(max_sweeps) + " sweeps");
}

}  // namespace magpc
