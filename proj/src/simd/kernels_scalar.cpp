#include "magpc/simd/kernels.hpp"

namespace magpc::simd::detail {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double squared_distance_scalar(const double* a, const double* b,
                               std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

void geometric_series_grid_scalar(const double* gains, std::size_t n_gains,
                                  double ratio, const double* coeff,
                                  std::size_t n_terms, double* out) {
  for (std::size_t j = 0; j < n_gains; ++j) {
    const double g = gains[j];
    const double q = g * ratio;
    double power = q;  // q^t for t = 1
    double acc = 0.0;
    for (std::size_t t = 0; t < n_terms; ++t) {
      acc += power * coeff[t];
      power *= q;
      if (power == 0.0) break;
    }
    out[j] = g * acc;
  }
}

}  // namespace magpc::simd::detail
