#include "magpc/random.hpp"
#include "magpc/simd/kernels.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

using namespace magpc;
using namespace magpc::simd;

namespace {

std::vector<double> draw(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-1, 1);
  return v;
}

std::vector<Isa> available() {
  std::vector<Isa> out{Isa::kScalar};
  if (isa_available(Isa::kAvx2)) out.push_back(Isa::kAvx2);
  return out;
}

}  // namespace

TEST(Simd, EveryVariantMatchesNaiveLoops) {
  Rng rng(1);
  for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 16u, 33u, 1000u}) {
    const auto a = draw(rng, n), b = draw(rng, n);
    double dot = 0, sq = 0;
    for (std::size_t i = 0; i < n; ++i) {
      dot += a[i] * b[i];
      sq += (a[i] - b[i]) * (a[i] - b[i]);
    }
    for (Isa isa : available()) {
      const KernelTable& k = kernels(isa);
      EXPECT_NEAR(k.dot(a.data(), b.data(), n), dot, 1e-13 * (1 + n)) << isa_name(isa);
      EXPECT_NEAR(k.squared_distance(a.data(), b.data(), n), sq, 1e-13 * (1 + n)) << isa_name(isa);
      std::vector<double> y = b;
      k.axpy(0.25, a.data(), y.data(), n);
      for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(y[i], b[i] + 0.25 * a[i], 1e-15);
    }
  }
}

TEST(Simd, GeometricSeriesMatchesDirectSum) {
  Rng rng(2);
  const auto gains = draw(rng, 13);
  const auto coeff = draw(rng, 200);
  for (Isa isa : available()) {
    std::vector<double> out(gains.size());
    kernels(isa).geometric_series_grid(gains.data(), gains.size(), 0.5, coeff.data(), coeff.size(), out.data());
    for (std::size_t j = 0; j < gains.size(); ++j) {
      double s = 0;
      for (std::size_t t = 1; t <= coeff.size(); ++t) s += gains[j] * std::pow(gains[j] * 0.5, static_cast<double>(t)) * coeff[t - 1];
      EXPECT_NEAR(out[j], s, 1e-13) << isa_name(isa);
    }
  }
}

TEST(Simd, VariantsAgreeClosely) {
  if (!isa_available(Isa::kAvx2)) GTEST_SKIP() << "no AVX2 on this machine";
  Rng rng(3);
  const auto a = draw(rng, 4097), b = draw(rng, 4097);
  const double s = kernels(Isa::kScalar).dot(a.data(), b.data(), a.size());
  const double v = kernels(Isa::kAvx2).dot(a.data(), b.data(), a.size());
  EXPECT_NEAR(s, v, 1e-12 * a.size());
}

TEST(Simd, DispatchPicksAnAvailableVariant) { EXPECT_TRUE(isa_available(active_isa())); }
