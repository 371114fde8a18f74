#include "magpc/linalg.hpp"

#include "magpc/errors.hpp"

#include <limits>

namespace magpc {

double spectral_norm(const Mat& m) {
  if (m.size() == 0) return 0.0;
  if (m.rows() == 1 || m.cols() == 1) return m.norm();
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues()(0);
}

double condition_number(const Eigen::MatrixXcd& q) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(q);
  const auto& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  if (smin <= 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

Mat hstack(const std::vector<Mat>& blocks) {
  if (blocks.empty()) return Mat();
  Eigen::Index cols = 0;
  const Eigen::Index rows = blocks.front().rows();
  for (const auto& b : blocks) {
    if (b.rows() != rows) throw DimensionError("hstack: row count mismatch");
    cols += b.cols();
  }
  Mat out(rows, cols);
  Eigen::Index c = 0;
  for (const auto& b : blocks) {
    out.middleCols(c, b.cols()) = b;
    c += b.cols();
  }
  return out;
}

Mat vstack(const std::vector<Mat>& blocks) {
  if (blocks.empty()) return Mat();
  Eigen::Index rows = 0;
  const Eigen::Index cols = blocks.front().cols();
  for (const auto& b : blocks) {
    if (b.cols() != cols) throw DimensionError("vstack: column count mismatch");
    rows += b.rows();
  }
  Mat out(rows, cols);
  Eigen::Index r = 0;
  for (const auto& b : blocks) {
    out.middleRows(r, b.rows()) = b;
    r += b.rows();
  }
  return out;
}

}  // namespace magpc
