#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>

#include "kbal/rng.hpp"

using kbal::replication_stream;
using kbal::RngStream;
using kbal::splitmix64;

TEST_CASE("splitmix64 reproduces published outputs") {
  CHECK(splitmix64(0) == 0xe220a8397b1dcdafull);
  CHECK(splitmix64(0x9e3779b97f4a7c15ull) == 0x6e789e6aa1b965f4ull);
  CHECK(splitmix64(42) == 0xbdd732262feb6e95ull);
}

TEST_CASE("streams are deterministic and seed-sensitive") {
  RngStream a(123), b(123), c(124);
  bool all_equal = true, any_diff = false;
  for (int i = 0; i < 1000; ++i) {
    const double ua = a.uniform();
    all_equal = all_equal && (ua == b.uniform());
    any_diff = any_diff || (ua != c.uniform());
  }
  CHECK(all_equal);
  CHECK(any_diff);
}

TEST_CASE("replication streams differ across replications") {
  RngStream r0 = replication_stream(7, 0);
  RngStream r1 = replication_stream(7, 1);
  RngStream r0_again = replication_stream(7, 0);
  const double a = r0.uniform();
  CHECK(a == r0_again.uniform());
  CHECK(a != r1.uniform());
}

TEST_CASE("uniform ranges respect their bounds") {
  RngStream rng(9);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const double v = rng.uniform_open();
    CHECK(v > 0.0);
    CHECK(v < 1.0);
    const double w = rng.uniform_range(-3.0, 3.0);
    CHECK(w >= -3.0);
    CHECK(w < 3.0);
  }
}

TEST_CASE("normal and chi-square moments") {
  RngStream rng(2024);
  const int n = 200000;
  double s = 0.0, s2 = 0.0, c = 0.0, c2 = 0.0, heads = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s += z;
    s2 += z * z;
    const double x = rng.chisq1();
    c += x;
    c2 += x * x;
    if (rng.bernoulli(0.3)) heads += 1.0;
  }
  const double mean = s / n, var = s2 / n - mean * mean;
  CHECK(std::abs(mean) < 0.01);
  CHECK(std::abs(var - 1.0) < 0.02);
  const double cmean = c / n, cvar = c2 / n - cmean * cmean;
  CHECK(std::abs(cmean - 1.0) < 0.02);   // E chi2_1 = 1
  CHECK(std::abs(cvar - 2.0) < 0.1);     // Var chi2_1 = 2
  CHECK(std::abs(heads / n - 0.3) < 0.01);
}

TEST_CASE("normal tails are symmetric by construction") {
  RngStream a(5), b(5);
  (void)b;
  // Inversion maps u and a hypothetical 1-u to mirrored values; spot-check
  // that extreme uniforms do not produce infinities.
  for (int i = 0; i < 50000; ++i) {
    const double z = a.normal();
    CHECK(std::isfinite(z));
    CHECK(std::abs(z) < 9.0);
  }
}
