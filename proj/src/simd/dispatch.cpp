#include "magpc/simd/kernels.hpp"

#include <cstdlib>
#include <string>

namespace magpc::simd {

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa detect() {
  const bool avx2 = cpu_has_avx2();
  if (const char* env = std::getenv("MAGPC_SIMD")) {
    const std::string want(env);
    if (want == "scalar") return Isa::kScalar;
    if (want == "avx2" && avx2) return Isa::kAvx2;
  }
  return avx2 ? Isa::kAvx2 : Isa::kScalar;
}

const KernelTable kScalarTable{
    &detail::dot_scalar, &detail::axpy_scalar, &detail::squared_distance_scalar,
    &detail::geometric_series_grid_scalar};

const KernelTable kAvx2Table{
    &detail::dot_avx2, &detail::axpy_avx2, &detail::squared_distance_avx2,
    &detail::geometric_series_grid_avx2};

}  // namespace

std::string_view isa_name(Isa isa) {
  return isa == Isa::kAvx2 ? "avx2" : "scalar";
}

bool isa_available(Isa isa) {
  static const bool avx2 = cpu_has_avx2();
  return isa == Isa::kScalar || avx2;
}

Isa active_isa() {
  static const Isa isa = detect();
  return isa;
}

const KernelTable& kernels(Isa isa) {
  if (isa == Isa::kAvx2 && isa_available(Isa::kAvx2)) return kAvx2Table;
  return kScalarTable;
}

double dot(std::span<const double> a, std::span<const double> b) {
  return kernels().dot(a.data(), b.data(), a.size() < b.size() ? a.size() : b.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  kernels().axpy(alpha, x.data(), y.data(), x.size() < y.size() ? x.size() : y.size());
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  return kernels().squared_distance(a.data(), b.data(),
                                    a.size() < b.size() ? a.size() : b.size());
}

}  // namespace magpc::simd
