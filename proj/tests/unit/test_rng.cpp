#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "critbatch/rng.hpp"

using namespace critbatch;

TEST_CASE("counter hash is a pure function of its words") {
  CHECK(hash4(1, 2, 3, 4, 5) == hash4(1, 2, 3, 4, 5));
  CHECK(hash4(1, 2, 3, 4, 5) != hash4(1, 2, 3, 4, 6));
  CHECK(hash4(1, 2, 3, 4, 5) != hash4(2, 2, 3, 4, 5));
  CHECK(hash4(1, 2, 3, 4, 5) != hash4(1, 3, 2, 4, 5));
}

TEST_CASE("uniform values live in their half-open/open intervals") {
  for (std::uint64_t i = 0; i < 10000; ++i) {
    const std::uint64_t bits = hash4(42, i, 0, 0, 0);
    const double u = u01(bits);
    const double v = u01_open(bits);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(v > 0.0);
    CHECK(v <= 1.0);
  }
  CHECK(u01(0) == 0.0);
  CHECK(u01_open(~std::uint64_t{0}) == 1.0);
}

TEST_CASE("uniform_index stays in range and covers the range") {
  const std::uint64_t n = 13;
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 5000; ++i) {
    const std::uint64_t idx = uniform_index(hash4(7, i, 0, 0, 0), n);
    REQUIRE(idx < n);
    seen.insert(idx);
  }
  CHECK(seen.size() == n);
}

TEST_CASE("gaussian stream has the right first two moments") {
  const int m = 100000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < m; ++i) {
    const double z = gauss(hash4(3, static_cast<std::uint64_t>(i), 0, 0, 9),
                           hash4(3, static_cast<std::uint64_t>(i), 1, 0, 9));
    sum += z;
    sum_sq += z * z;
  }
  const double mean = sum / m;
  const double var = sum_sq / m - mean * mean;
  // 3 standard errors: se(mean) ~ 1/sqrt(m), se(var) ~ sqrt(2/m)
  CHECK(std::fabs(mean) < 3.0 / std::sqrt(static_cast<double>(m)));
  CHECK(std::fabs(var - 1.0) < 3.0 * std::sqrt(2.0 / m));
}
