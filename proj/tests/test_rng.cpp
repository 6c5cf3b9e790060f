#include <catch_amalgamated.hpp>

#include <cmath>

#include "flagwalk/rng.hpp"

using flagwalk::CounterRng;
using flagwalk::RngStream;

TEST_CASE("identical stream addresses reproduce the same draws") {
  CounterRng a(42, RngStream::tests, 7), b(42, RngStream::tests, 7);
  for (int i = 0; i < 100; ++i) REQUIRE(a.next_u64() == b.next_u64());
}

TEST_CASE("distinct trials and streams decorrelate") {
  CounterRng a(42, RngStream::tests, 7), b(42, RngStream::tests, 8);
  CounterRng c(42, RngStream::words, 7);
  int equal_ab = 0, equal_ac = 0;
  for (int i = 0; i < 64; ++i) {
    const uint64_t x = a.next_u64();
    if (x == b.next_u64()) ++equal_ab;
    if (x == c.next_u64()) ++equal_ac;
  }
  REQUIRE(equal_ab == 0);
  REQUIRE(equal_ac == 0);
}

TEST_CASE("uniform doubles live strictly inside (0,1) and average to 1/2") {
  CounterRng rng(1, RngStream::tests, 0);
  double sum = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  REQUIRE(std::abs(sum / n - 0.5) < 3.0 / std::sqrt(12.0 * n));
}

TEST_CASE("gaussian moments") {
  CounterRng rng(9, RngStream::tests, 3);
  double s1 = 0, s2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double g = rng.gaussian();
    s1 += g;
    s2 += g * g;
  }
  REQUIRE(std::abs(s1 / n) < 4.0 / std::sqrt(double(n)));
  REQUIRE(std::abs(s2 / n - 1.0) < 6.0 / std::sqrt(double(n)));
}

TEST_CASE("cdf picks respect the weights") {
  CounterRng rng(5, RngStream::tests, 1);
  const std::vector<double> cdf = {0.5, 1.0};
  long count0 = 0;
  const long n = 1000000;
  for (long i = 0; i < n; ++i)
    if (rng.pick(cdf) == 0) ++count0;
  // binomial oracle: 3 sigma band around n/2
  const double sigma = std::sqrt(0.25 / double(n));
  REQUIRE(std::abs(double(count0) / double(n) - 0.5) <= 3.0 * sigma);
}
