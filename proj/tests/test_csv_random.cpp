#include "magpc/csv.hpp"
#include "magpc/random.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <set>
#include <sstream>

using namespace magpc;

TEST(Csv, SeventeenDigitsRoundTrip) {
  EXPECT_EQ(fmt17(0.1), "0.10000000000000001");
  EXPECT_EQ(fmt17(1.0), "1");
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.normal() * std::pow(10.0, static_cast<int>(rng.uniform(-20, 20)));
    EXPECT_EQ(std::strtod(fmt17(v).c_str(), nullptr), v);
  }
}

TEST(Csv, RowJoinsFields) {
  CsvRow r;
  r << "T" << 3 << 0.5 << 7ULL;
  std::ostringstream os;
  r.write(os);
  EXPECT_EQ(os.str(), "T,3,0.5,7\n");
}

TEST(Random, StreamsAreReproducibleAndDistinct) {
  Rng a(42), b(42);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a.next(), b.next());
  std::set<std::uint64_t> seeds;
  for (std::uint64_t t = 0; t < 50; ++t) {
    for (std::uint64_t k = 0; k < 50; ++k) seeds.insert(derive_seed(7, t, k));
  }
  EXPECT_EQ(seeds.size(), 2500u);
}

TEST(Random, UniformAndNormalMoments) {
  Rng rng(3);
  double su = 0, sn = 0, sn2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    su += u;
    const double z = rng.normal();
    sn += z;
    sn2 += z * z;
  }
  EXPECT_NEAR(su / n, 0.5, 0.01);
  EXPECT_NEAR(sn / n, 0.0, 0.01);
  EXPECT_NEAR(sn2 / n, 1.0, 0.02);
}
