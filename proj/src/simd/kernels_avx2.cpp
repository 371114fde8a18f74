#include "magpc/simd/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>
#define MAGPC_HAVE_AVX2_TU 1
#else
#define MAGPC_HAVE_AVX2_TU 0
#endif

namespace magpc::simd::detail {

#if MAGPC_HAVE_AVX2_TU

namespace {
inline double horizontal_sum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  const __m128d swapped = _mm_unpackhi_pd(pair, pair);
  return _mm_cvtsd_f64(_mm_add_sd(pair, swapped));
}
}  // namespace

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(
        acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(_mm256_loadu_pd(a + i + 4),
                                             _mm256_loadu_pd(b + i + 4)));
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_add_pd(
        acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  double acc = horizontal_sum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vy = _mm256_loadu_pd(y + i);
    _mm256_storeu_pd(y + i,
                     _mm256_add_pd(vy, _mm256_mul_pd(va, _mm256_loadu_pd(x + i))));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

double squared_distance_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d =
        _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
  }
  double out = horizontal_sum(acc);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    out += d * d;
  }
  return out;
}

// Four gains per lane group; the per-lane operation sequence is identical to
// the scalar reference, so results agree bit-for-bit.
void geometric_series_grid_avx2(const double* gains, std::size_t n_gains,
                                double ratio, const double* coeff,
                                std::size_t n_terms, double* out) {
  const __m256d vratio = _mm256_set1_pd(ratio);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= n_gains; j += 4) {
    const __m256d g = _mm256_loadu_pd(gains + j);
    const __m256d q = _mm256_mul_pd(g, vratio);
    __m256d power = q;
    __m256d acc = zero;
    for (std::size_t t = 0; t < n_terms; ++t) {
      acc = _mm256_add_pd(acc, _mm256_mul_pd(power, _mm256_set1_pd(coeff[t])));
      power = _mm256_mul_pd(power, q);
      if (_mm256_movemask_pd(_mm256_cmp_pd(power, zero, _CMP_NEQ_UQ)) == 0) {
        break;
      }
    }
    _mm256_storeu_pd(out + j, _mm256_mul_pd(g, acc));
  }
  if (j < n_gains) {
    geometric_series_grid_scalar(gains + j, n_gains - j, ratio, coeff, n_terms,
                                 out + j);
  }
}

#else

double dot_avx2(const double* a, const double* b, std::size_t n) {
  return dot_scalar(a, b, n);
}
void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  axpy_scalar(alpha, x, y, n);
}
double squared_distance_avx2(const double* a, const double* b, std::size_t n) {
  return squared_distance_scalar(a, b, n);
}
void geometric_series_grid_avx2(const double* gains, std::size_t n_gains,
                                double ratio, const double* coeff,
                                std::size_t n_terms, double* out) {
  geometric_series_grid_scalar(gains, n_gains, ratio, coeff, n_terms, out);
}

#endif

}  // namespace magpc::simd::detail
