#include <cmath>
#include <vector>

#include "doctest.h"
#include "kvsopt/prng.hpp"

using kvs::RngStream;

TEST_CASE("philox known-answer vectors") {
  using A = std::array<std::uint32_t, 4>;
  CHECK(kvs::philox4x32_10({0, 0, 0, 0}, {0, 0}) == A{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(kvs::philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        A{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(kvs::philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        A{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("same seed and stream replay identically") {
  RngStream a(42, 0), b(42, 0);
  for (int i = 0; i < 3; ++i) CHECK(a.next_uniform() == b.next_uniform());
  for (int i = 0; i < 101; ++i) CHECK(a.next_standard_normal() == b.next_standard_normal());
  RngStream c(42, 1);
  RngStream d(42, 0);
  CHECK(c.next_u64() != d.next_u64());
}

TEST_CASE("uniform mean over 1e6 draws") {
  RngStream s(42, 0);
  double sum = 0.0;
  for (int i = 0; i < 1'000'000; ++i) {
    const double u = s.next_uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(std::abs(sum / 1e6 - 0.5) < 0.002);
}

TEST_CASE("distinct streams are uncorrelated") {
  RngStream a(42, 0), b(42, 1);
  const int n = 100'000;
  double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
  for (int i = 0; i < n; ++i) {
    const double x = a.next_uniform();
    const double y = b.next_uniform();
    sa += x;
    sb += y;
    saa += x * x;
    sbb += y * y;
    sab += x * y;
  }
  const double cov = sab / n - (sa / n) * (sb / n);
  const double rho = cov / std::sqrt((saa / n - sa * sa / n / n) * (sbb / n - sb * sb / n / n));
  CHECK(std::abs(rho) < 0.01);
}

TEST_CASE("standard normal moments over 1e6 draws") {
  RngStream s(7, 3);
  double sum = 0.0, sq = 0.0;
  const int n = 1'000'000;
  for (int i = 0; i < n; ++i) {
    const double z = s.next_standard_normal();
    sum += z;
    sq += z * z;
  }
  const double mean = sum / n;
  CHECK(std::abs(mean) < 0.005);
  CHECK(std::abs(sq / n - mean * mean - 1.0) < 0.01);
}

TEST_CASE("normal draws consume uniforms in pairs") {
  RngStream s(1, 0);
  s.next_standard_normal();
  CHECK(s.words_consumed() == 2);
  s.next_standard_normal();
  CHECK(s.words_consumed() == 2);
  s.next_standard_normal();
  CHECK(s.words_consumed() == 4);
}

TEST_CASE("derive does not depend on the parent's position") {
  RngStream a(9, 4);
  RngStream b(9, 4);
  for (int i = 0; i < 10; ++i) b.next_u64();
  RngStream ca = a.derive(3), cb = b.derive(3);
  CHECK(ca.next_u64() == cb.next_u64());
  CHECK(a.derive(3).stream_id() != a.derive(4).stream_id());
}

TEST_CASE("next_index stays in range and is roughly uniform") {
  RngStream s(5, 0);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70'000; ++i) {
    const auto k = s.next_index(7);
    REQUIRE(k < 7);
    ++counts[k];
  }
  for (int c : counts) CHECK(std::abs(c - 10'000) < 500);
}
