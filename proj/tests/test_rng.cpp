#include "metalr/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

using namespace metalr;

// Known-answer vectors published with the Random123 reference
// implementation (philox4x32, 10 rounds).
TEST(Philox, KnownAnswerZero) {
  const auto out = philox4x32({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(out[0], 0x6627e8d5u);
  EXPECT_EQ(out[1], 0xe169c58du);
  EXPECT_EQ(out[2], 0xbc57ac4cu);
  EXPECT_EQ(out[3], 0x9b00dbd8u);
}

TEST(Philox, KnownAnswerAllOnes) {
  const auto out = philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
  EXPECT_EQ(out[0], 0x408f276du);
  EXPECT_EQ(out[1], 0x41c83b0eu);
  EXPECT_EQ(out[2], 0xa20bc7c6u);
  EXPECT_EQ(out[3], 0x6d5451fdu);
}

TEST(Philox, KnownAnswerPiDigits) {
  const auto out = philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
  EXPECT_EQ(out[0], 0xd16cfe09u);
  EXPECT_EQ(out[1], 0x94fdccebu);
  EXPECT_EQ(out[2], 0x5001e420u);
  EXPECT_EQ(out[3], 0x24126ea1u);
}

TEST(RandomStream, SameStreamSameValues) {
  RandomStream a(42, {StreamTag::Heavy, 7});
  RandomStream b(42, {StreamTag::Heavy, 7});
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.normal(), b.normal());
}

TEST(RandomStream, DistinctStreamsDiffer) {
  std::set<std::uint32_t> firsts;
  for (std::uint32_t tag = 0; tag < 4; ++tag)
    for (std::uint64_t index : {0ull, 1ull, 1ull << 32}) {
      RandomStream s(5, {static_cast<StreamTag>(tag), index});
      firsts.insert(s.next_u32());
    }
  EXPECT_EQ(firsts.size(), 12u);
  RandomStream x(1, {StreamTag::Meta, 0}), y(2, {StreamTag::Meta, 0});
  EXPECT_NE(x.next_u32(), y.next_u32());
}

TEST(RandomStream, UniformRangeAndMoments) {
  RandomStream s(3, {StreamTag::Trial, 0});
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = s.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    sum2 += u * u;
  }
  const double mean = sum / n;
  // Var(U) = 1/12; 5 standard errors.
  EXPECT_NEAR(mean, 0.5, 5.0 * std::sqrt(1.0 / 12.0 / n));
  EXPECT_NEAR(sum2 / n - mean * mean, 1.0 / 12.0, 0.002);
}

TEST(RandomStream, NormalMoments) {
  RandomStream s(4, {StreamTag::Trial, 1});
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0, sum4 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = s.normal();
    sum += z;
    sum2 += z * z;
    sum4 += z * z * z * z;
  }
  EXPECT_NEAR(sum / n, 0.0, 5.0 / std::sqrt(n));
  EXPECT_NEAR(sum2 / n, 1.0, 5.0 * std::sqrt(2.0 / n));
  EXPECT_NEAR(sum4 / n, 3.0, 5.0 * std::sqrt(96.0 / n));
}

TEST(RandomStream, RademacherBalanced) {
  RandomStream s(9, {StreamTag::Trial, 2});
  const int n = 100000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = s.rademacher();
    ASSERT_TRUE(r == 1.0 || r == -1.0);
    sum += r;
  }
  EXPECT_LT(std::abs(sum / n), 5.0 / std::sqrt(n));
}

TEST(DeriveSeed, DistinctAndStable) {
  std::set<std::uint64_t> seeds;
  for (std::uint64_t a = 0; a < 20; ++a)
    for (std::uint64_t b = 0; b < 20; ++b) seeds.insert(derive_seed(11, a, b));
  EXPECT_EQ(seeds.size(), 400u);
  EXPECT_EQ(derive_seed(11, 3, 4), derive_seed(11, 3, 4));
  EXPECT_NE(derive_seed(11, 3, 4), derive_seed(12, 3, 4));
}
