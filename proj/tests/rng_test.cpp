#include "sut/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <vector>

namespace sut {
namespace {

using Block = std::array<std::uint32_t, 4>;

// Published known-answer vectors for the 10-round 4x32 configuration.
TEST(Philox, KnownAnswerZeros) {
  const Block out = Philox4x32::block({0u, 0u, 0u, 0u}, {0u, 0u});
  EXPECT_EQ(out[0], 0x6627e8d5u);
  EXPECT_EQ(out[1], 0xe169c58du);
  EXPECT_EQ(out[2], 0xbc57ac4cu);
  EXPECT_EQ(out[3], 0x9b00dbd8u);
}

TEST(Philox, KnownAnswerAllOnes) {
  const Block out = Philox4x32::block(
      {0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
      {0xffffffffu, 0xffffffffu});
  EXPECT_EQ(out[0], 0x408f276du);
  EXPECT_EQ(out[1], 0x41c83b0eu);
  EXPECT_EQ(out[2], 0xa20bc7c6u);
  EXPECT_EQ(out[3], 0x6d5451fdu);
}

TEST(Philox, KnownAnswerPiDigits) {
  const Block out = Philox4x32::block(
      {0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
      {0xa4093822u, 0x299f31d0u});
  EXPECT_EQ(out[0], 0xd16cfe09u);
  EXPECT_EQ(out[1], 0x94fdccebu);
  EXPECT_EQ(out[2], 0x5001e420u);
  EXPECT_EQ(out[3], 0x24126ea1u);
}

TEST(RandomStreamTest, SameSeedSameSequence) {
  RandomStream a(42, 3);
  RandomStream b(42, 3);
  for (int i = 0; i < 100; ++i) {
    ASSERT_EQ(a.next_u32(), b.next_u32());
  }
  RandomStream c(42, 3);
  RandomStream d(42, 3);
  for (int i = 0; i < 100; ++i) {
    ASSERT_DOUBLE_EQ(c.normal(), d.normal());
  }
}

TEST(RandomStreamTest, DifferentStreamsAndSeedsDiffer) {
  RandomStream a(42, 0);
  RandomStream b(42, 1);
  RandomStream c(43, 0);
  int same_ab = 0;
  int same_ac = 0;
  for (int i = 0; i < 64; ++i) {
    const std::uint32_t va = a.next_u32();
    if (va == b.next_u32()) ++same_ab;
    if (va == c.next_u32()) ++same_ac;
  }
  EXPECT_LE(same_ab, 1);
  EXPECT_LE(same_ac, 1);
}

TEST(RandomStreamTest, UniformBoundsAndMoments) {
  RandomStream r(7, 0);
  const int n = 20000;
  double sum = 0.0;
  double sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    sq += u * u;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  EXPECT_NEAR(mean, 0.5, 0.01);
  EXPECT_NEAR(var, 1.0 / 12.0, 0.005);
}

TEST(RandomStreamTest, UniformRangeRespectsEndpoints) {
  RandomStream r(7, 1);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform(-3.0, 5.0);
    ASSERT_GE(u, -3.0);
    ASSERT_LT(u, 5.0);
  }
}

TEST(RandomStreamTest, NormalMoments) {
  RandomStream r(11, 0);
  const int n = 40000;
  double sum = 0.0;
  double sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = r.normal();
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  EXPECT_NEAR(mean, 0.0, 0.02);
  EXPECT_NEAR(var, 1.0, 0.03);
}

TEST(RandomStreamTest, ScaledNormal) {
  RandomStream r(11, 2);
  const int n = 40000;
  double sum = 0.0;
  double sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = r.normal(10.0, 2.0);
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  EXPECT_NEAR(mean, 10.0, 0.05);
  EXPECT_NEAR(var, 4.0, 0.15);
}

TEST(RandomStreamTest, PoissonMoments) {
  RandomStream r(13, 0);
  const int n = 20000;
  double sum = 0.0;
  double sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const int k = r.poisson(3.0);
    ASSERT_GE(k, 0);
    sum += k;
    sq += static_cast<double>(k) * k;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  EXPECT_NEAR(mean, 3.0, 0.1);
  EXPECT_NEAR(var, 3.0, 0.2);
}

TEST(RandomStreamTest, PoissonEdgeCases) {
  RandomStream r(13, 1);
  EXPECT_EQ(r.poisson(0.0), 0);
  EXPECT_THROW(r.poisson(-1.0), std::invalid_argument);
  int total = 0;
  for (int i = 0; i < 1000; ++i) total += r.poisson(0.01);
  EXPECT_LT(total, 40);  // roughly 10 expected
}

TEST(RandomStreamTest, BernoulliRate) {
  RandomStream r(17, 0);
  int hits = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) hits += r.bernoulli(0.2) ? 1 : 0;
  EXPECT_NEAR(static_cast<double>(hits) / n, 0.2, 0.01);
}

TEST(RandomStreamTest, StreamsAreUncorrelated) {
  RandomStream a(99, 0);
  RandomStream b(99, 1);
  const int n = 5000;
  double sa = 0.0, sb = 0.0, sab = 0.0, sa2 = 0.0, sb2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = a.uniform();
    const double y = b.uniform();
    sa += x;
    sb += y;
    sab += x * y;
    sa2 += x * x;
    sb2 += y * y;
  }
  const double cov = sab / n - (sa / n) * (sb / n);
  const double corr = cov / std::sqrt((sa2 / n - (sa / n) * (sa / n)) *
                                      (sb2 / n - (sb / n) * (sb / n)));
  EXPECT_LT(std::abs(corr), 0.05);
}

}  // namespace
}  // namespace sut
