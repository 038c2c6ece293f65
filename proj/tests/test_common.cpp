#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <vector>

#include <sgp/common.hpp>

using namespace sgp;

TEST_CASE("mix64 is deterministic and spreads nearby inputs") {
  CHECK(mix64(42) == mix64(42));
  CHECK(mix64(42) != mix64(43));
  CHECK(mix64(0) != 0);
  // Low bits of consecutive inputs should not correlate.
  std::set<std::uint64_t> lows;
  for (std::uint64_t i = 0; i < 64; ++i) lows.insert(mix64(i) & 0xFF);
  CHECK(lows.size() > 32);
}

TEST_CASE("derive_seed distinguishes argument order and master seed") {
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 2));
  CHECK(derive_seed(1, 2, 3) != derive_seed(2, 2, 3));
  CHECK(derive_seed(7, 0, 0, 5) != derive_seed(7, 0, 5, 0));
  CHECK(derive_seed(9, 4) == derive_seed(9, 4));
}

TEST_CASE("rng reproduces the same stream for the same seed") {
  Rng a(123), b(123), c(124);
  bool all_equal = true;
  bool any_diff = false;
  for (int i = 0; i < 100; ++i) {
    const double va = a.uniform01();
    all_equal = all_equal && va == b.uniform01();
    any_diff = any_diff || va != c.uniform01();
  }
  CHECK(all_equal);
  CHECK(any_diff);
}

TEST_CASE("uniform01 stays in the half-open unit interval") {
  Rng rng(5);
  for (int i = 0; i < 10000; ++i) {
    const double v = rng.uniform01();
    REQUIRE(v >= 0.0);
    REQUIRE(v < 1.0);
  }
}

TEST_CASE("uniform respects bounds and uniform_index covers its range") {
  Rng rng(17);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.uniform(-2.5, 4.0);
    REQUIRE(v >= -2.5);
    REQUIRE(v <= 4.0);
  }
  std::set<std::size_t> seen;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t k = rng.uniform_index(7);
    REQUIRE(k < 7);
    seen.insert(k);
  }
  CHECK(seen.size() == 7);
}

TEST_CASE("gaussian draws have roughly standard moments") {
  Rng rng(99);
  const int n = 100000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double g = rng.gaussian();
    sum += g;
    sumsq += g * g;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK_THAT(mean, Catch::Matchers::WithinAbs(0.0, 0.02));
  CHECK_THAT(var, Catch::Matchers::WithinAbs(1.0, 0.03));
}

TEST_CASE("error types share the common base") {
  CHECK_THROWS_AS(throw ParseError("x"), Error);
  CHECK_THROWS_AS(throw GenerationError("x"), Error);
  CHECK_THROWS_AS(throw ModelMissingError("x"), Error);
  try {
    throw ConfigError("bad key on line 3");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}
