#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "streamad/rng.hpp"

using streamad::SplitMix64;

TEST_CASE("SplitMix64 matches the reference stream", "[rng]") {
  // Reference outputs for seed 0 (Vigna's splitmix64.c).
  SplitMix64 rng(0);
  CHECK(rng.next() == 0xe220a8397b1dcdafULL);
  CHECK(rng.next() == 0x6e789e6aa1b965f4ULL);
  CHECK(rng.next() == 0x06c45d188009454fULL);
  CHECK(rng.next() == 0xf88bb8a8724c81ecULL);
}

TEST_CASE("uniform01 uses the top 53 bits", "[rng]") {
  SplitMix64 rng(140);
  CHECK(rng.uniform01() == 0.9005046507009625);
}

TEST_CASE("same seed, same stream; split streams diverge", "[rng]") {
  SplitMix64 a(140), b(140);
  for (int i = 0; i < 1000; ++i) REQUIRE(a.normal() == b.normal());

  SplitMix64 parent(7);
  SplitMix64 child = parent.split();
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 64; ++i) {
    seen.insert(parent.next());
    seen.insert(child.next());
  }
  CHECK(seen.size() == 128);
}

TEST_CASE("uniform and normal draws have the expected moments", "[rng]") {
  SplitMix64 rng(2024);
  const int n = 200000;
  double su = 0.0, sn = 0.0, sn2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform(-1.0, 1.0);
    REQUIRE(u >= -1.0);
    REQUIRE(u < 1.0);
    su += u;
    const double z = rng.normal();
    REQUIRE(std::isfinite(z));
    sn += z;
    sn2 += z * z;
  }
  CHECK(std::abs(su / n) < 0.01);
  CHECK(std::abs(sn / n) < 0.01);
  CHECK(std::abs(sn2 / n - 1.0) < 0.02);
}
