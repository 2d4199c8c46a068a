#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "maskblur/rng.hpp"

using namespace maskblur;

namespace {

std::vector<std::uint64_t> draw(CounterRng& rng, int n) {
  std::vector<std::uint64_t> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) out.push_back(rng.next_u64());
  return out;
}

}  // namespace

// Reference outputs produced with an independent implementation of the same
// counter-based generator (Philox-4x64-10), frozen here.
TEST_CASE("raw stream matches frozen reference vectors") {
  SUBCASE("seed 0, stream 0, domain 0") {
    CounterRng rng(0, 0, RngDomain::MaskPattern);
    const std::vector<std::uint64_t> want = {
        0x02f4ba6408e4d89bull, 0x3dd62b0b9ca8c5b2ull, 0x1c8667a55d902e79ull,
        0x907d7a052fd5b4dcull, 0x809bf322883987c3ull, 0x471128b9e807f7ddull,
        0xf250ba0dbec065b7ull, 0xfc6ed66767a457bcull};
    CHECK(draw(rng, 8) == want);
  }
  SUBCASE("seed 0xdeadbeef, stream 0, domain 0") {
    CounterRng rng(0xdeadbeefull, 0, RngDomain::MaskPattern);
    const std::vector<std::uint64_t> want = {
        0xa4e930dc738acaf1ull, 0xb1c7ecc6484e9cf0ull, 0x6b88a411909298aaull,
        0x66f3c896201f7262ull, 0x8217df84a2c417d2ull, 0x6545baef6469464dull,
        0xcb729362b22b9981ull, 0x8455360174d010a1ull};
    CHECK(draw(rng, 8) == want);
  }
  SUBCASE("seed 42, stream 7, domain 0") {
    CounterRng rng(42, 7, RngDomain::MaskPattern);
    const std::vector<std::uint64_t> want = {0x2bfb9d635be188e2ull, 0x2b0049f790afff84ull,
                                             0x1479a84f09f8426dull, 0xf188dde28ec79dc1ull};
    CHECK(draw(rng, 4) == want);
  }
  SUBCASE("seed 42, stream 7, domain 2") {
    CounterRng rng(42, 7, RngDomain::Calibration);
    const std::vector<std::uint64_t> want = {
        0xf20d9f1fb974afd5ull, 0x5ae0c97d2f8e8f8full, 0x8b2caebabc4a5643ull,
        0x9d996953cdd04136ull, 0xebb94482fbafeed5ull, 0x14a934b2f0dd3683ull,
        0xaab913b5c6a12e9eull, 0xc77b3a3696ad52a4ull};
    CHECK(draw(rng, 8) == want);
  }
  SUBCASE("seed 1, stream 0, domain 4") {
    CounterRng rng(1, 0, RngDomain::Pattern1D);
    const std::vector<std::uint64_t> want = {
        0x9b07397a57538669ull, 0x8c7b489dea6f382aull, 0x77da64ef18dae75full,
        0x01edee378eba58b7ull, 0x17e8b8b29be2ee5full, 0xce985706ab2ae9cbull,
        0xcc34b6815bcbf9e5ull, 0xce1ddbbd60f2f359ull};
    CHECK(draw(rng, 8) == want);
  }
  SUBCASE("seed 123456789, stream 3, domain 1") {
    CounterRng rng(123456789, 3, RngDomain::MeasurementNoise);
    const std::vector<std::uint64_t> want = {0x941e1a7873d9937eull, 0xcf1d4a61971dfe75ull,
                                             0x11d1f580ddf0325bull, 0x195f501d4d395d78ull};
    CHECK(draw(rng, 4) == want);
  }
}

TEST_CASE("streams and domains are disjoint") {
  CounterRng a(9, 0, RngDomain::MaskPattern);
  CounterRng b(9, 1, RngDomain::MaskPattern);
  CounterRng c(9, 0, RngDomain::MeasurementNoise);
  const auto va = draw(a, 16);
  const auto vb = draw(b, 16);
  const auto vc = draw(c, 16);
  CHECK(va != vb);
  CHECK(va != vc);
  CHECK(vb != vc);

  // Re-seeding reproduces the stream exactly.
  CounterRng a2(9, 0, RngDomain::MaskPattern);
  CHECK(draw(a2, 16) == va);
}

TEST_CASE("uniform values lie in [0,1) with sane mean") {
  CounterRng rng(3, 0, RngDomain::General);
  const int n = 100000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  // Standard error of the mean is ~0.0009; 5 sigma band.
  CHECK(std::abs(sum / n - 0.5) < 0.005);
}

TEST_CASE("normal draws have unit variance and zero mean") {
  CounterRng rng(4, 0, RngDomain::General);
  const int n = 200000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sumsq += z * z;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(std::abs(mean) < 0.01);
  CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("bounded draws are unbiased over the full range") {
  CounterRng rng(5, 0, RngDomain::General);
  const std::uint64_t bound = 10;
  std::vector<int> counts(bound, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const std::uint64_t v = rng.below(bound);
    REQUIRE(v < bound);
    ++counts[static_cast<std::size_t>(v)];
  }
  for (int c : counts) {
    CHECK(c > n / static_cast<int>(bound) - 600);
    CHECK(c < n / static_cast<int>(bound) + 600);
  }
}

TEST_CASE("sampling without replacement yields distinct in-range indices") {
  CounterRng rng(6, 2, RngDomain::General);
  const auto picks = rng.sample_without_replacement(64, 32);
  REQUIRE(picks.size() == 32);
  std::set<int> uniq(picks.begin(), picks.end());
  CHECK(uniq.size() == 32);
  for (int p : picks) {
    CHECK(p >= 0);
    CHECK(p < 64);
  }

  // Selection probability is uniform: every index appears ~half the time.
  std::vector<int> hits(64, 0);
  const int trials = 20000;
  for (int t = 0; t < trials; ++t) {
    CounterRng r(7, static_cast<std::uint64_t>(t), RngDomain::General);
    for (int p : r.sample_without_replacement(64, 32)) ++hits[static_cast<std::size_t>(p)];
  }
  for (int h : hits) {
    CHECK(h > trials / 2 - 1000);
    CHECK(h < trials / 2 + 1000);
  }
}
