#pragma once

// Data-parallel inner loops with a scalar reference implementation and an
// AVX2 variant. The active variant is picked once at startup from CPUID and
// can be forced with MAGPC_SIMD=scalar|avx2.

#include <cstddef>
#include <span>
#include <string_view>

namespace magpc::simd {

enum class Isa { kScalar, kAvx2 };

std::string_view isa_name(Isa isa);

// Best variant supported by this CPU (honours MAGPC_SIMD).
Isa active_isa();

// True if `isa` can run on this machine.
bool isa_available(Isa isa);

struct KernelTable {
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  double (*squared_distance)(const double* a, const double* b, std::size_t n);
  // For every gain g_j: out_j = sum_{t=1}^{T} g_j * (g_j * ratio)^t * coeff_{t-1},
  // i.e. the x-dependent part of the scalar lower-bound comparator cost
  // sum_t g x_t (b_t - 1/2) with x_t = (g * ratio)^t x_0 (x_0 folded into
  // coeff by the caller).
  void (*geometric_series_grid)(const double* gains, std::size_t n_gains,
                                double ratio, const double* coeff,
                                std::size_t n_terms, double* out);
};

const KernelTable& kernels(Isa isa);
inline const KernelTable& kernels() { return kernels(active_isa()); }

// Convenience wrappers over the active table.
double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
double squared_distance(std::span<const double> a, std::span<const double> b);

namespace detail {
double dot_scalar(const double* a, const double* b, std::size_t n);
void axpy_scalar(double alpha, const double* x, double* y, std::size_t n);
double squared_distance_scalar(const double* a, const double* b,
                               std::size_t n);
void geometric_series_grid_scalar(const double* gains, std::size_t n_gains,
                                  double ratio, const double* coeff,
                                  std::size_t n_terms, double* out);

double dot_avx2(const double* a, const double* b, std::size_t n);
void axpy_avx2(double alpha, const double* x, double* y, std::size_t n);
double squared_distance_avx2(const double* a, const double* b, std::size_t n);
void geometric_series_grid_avx2(const double* gains, std::size_t n_gains,
                                double ratio, const double* coeff,
                                std::size_t n_terms, double* out);
}  // namespace detail

}  // namespace magpc::simd
