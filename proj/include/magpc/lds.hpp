#pragma once

#include "magpc/linalg.hpp"

#include <optional>
#include <vector>

namespace magpc {

// x_{t+1} = A x_t + sum_i B_i u_t^i + w_t with ||w_t|| <= W.
struct LdsSystem {
  Mat A;
  std::vector<Mat> B;
  double W = 1.0;

  LdsSystem() = default;
  LdsSystem(Mat a, std::vector<Mat> b, double w);

  int d() const { return static_cast<int>(A.rows()); }
  int N() const { return static_cast<int>(B.size()); }
  int k(int i) const { return static_cast<int>(B[i].cols()); }
  int total_controls() const;
  double sum_B_norms() const;
  double max_B_norm() const;

  // Throws DimensionError / ConfigError on a malformed system.
  void validate() const;
};

Vec step(const LdsSystem& sys, const Vec& x, const std::vector<Vec>& controls,
         const Vec& w);

// Setting 1: x_next - A x_prev - B_i u. Setting 2 additionally removes the
// other agents' aggregate sum_{j != i} B_j u^j, which yields the true w.
Vec recover_disturbance(const LdsSystem& sys, int i, int setting,
                        const Vec& x_prev, const Vec& x_next, const Vec& own_u,
                        const std::optional<Vec>& aggregate_other);

// sum_{j != i} B_j u^j
Vec aggregate_other(const LdsSystem& sys, int i, const std::vector<Vec>& controls);

}  // namespace magpc
