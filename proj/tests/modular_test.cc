/*
 * Copyright 2026 The DDG Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "ddg/modular.h"

#include <cmath>
#include <random>
#include <type_traits>
#include <vector>

#include "gtest/gtest.h"

namespace ddg {
namespace {

Modulus M(int64_t m) { return *Modulus::FromValue(m); }

std::vector<int64_t> Residues(const ResidueVector& r) {
  return {r.residues().begin(), r.residues().end()};
}

// Circular distance on a range of width w.
double CircularGap(double u, double v, double w) {
  const double g = std::fmod(std::abs(u - v), w);
  return std::min(g, w - g);
}

TEST(ModulusTest, Validation) {
  EXPECT_FALSE(Modulus::FromValue(7).ok());
  EXPECT_FALSE(Modulus::FromValue(0).ok());
  EXPECT_TRUE(Modulus::FromValue(2).ok());
  EXPECT_TRUE(Modulus::FromValue(6).ok());
  EXPECT_FALSE(Modulus::FromBits(0).ok());
  EXPECT_FALSE(Modulus::FromBits(63).ok());
  auto m = Modulus::FromBits(62);
  ASSERT_TRUE(m.ok());
  EXPECT_EQ(m->value(), int64_t{1} << 62);
  EXPECT_EQ(Modulus::FromBits(16)->half(), 1 << 15);
}

TEST(ResidueVectorTest, RejectsOutOfRange) {
  EXPECT_FALSE(ResidueVector::Create({0, 8}, M(8)).ok());
  EXPECT_FALSE(ResidueVector::Create({-1}, M(8)).ok());
  EXPECT_TRUE(ResidueVector::Create({0, 7}, M(8)).ok());
}

TEST(ModReduceTest, Examples) {
  EXPECT_EQ(Residues(ModReduce(std::vector<int64_t>{-1}, M(8))),
            std::vector<int64_t>{7});
  EXPECT_EQ(Residues(ModReduce(std::vector<int64_t>{8}, M(8))),
            std::vector<int64_t>{0});
}

TEST(ModReduceTest, Additive) {
  RandomStream rng = MakeStream(1);
  std::uniform_int_distribution<int64_t> dist(-(int64_t{1} << 40),
                                              int64_t{1} << 40);
  const Modulus m = *Modulus::FromBits(13);
  for (int t = 0; t < 1000; ++t) {
    std::vector<int64_t> u(16), v(16), uv(16), ru(16);
    for (int i = 0; i < 16; ++i) {
      u[i] = dist(rng);
      v[i] = dist(rng);
      uv[i] = u[i] + v[i];
    }
    const auto a = ModReduce(u, m);
    const auto b = ModReduce(v, m);
    for (int i = 0; i < 16; ++i) ru[i] = a.residues()[i] + b.residues()[i];
    EXPECT_EQ(ModReduce(uv, m), ModReduce(ru, m));
  }
}

TEST(ModReduceTest, ExactAtSixtyTwoBits) {
  const Modulus m = *Modulus::FromBits(62);
  const int64_t big = (int64_t{1} << 62) - 1;
  const auto r = ModReduce(std::vector<int64_t>{-big, big, -(int64_t{1} << 62)}, m);
  EXPECT_EQ(Residues(r), (std::vector<int64_t>{1, big, 0}));
}

TEST(CenterTest, Examples) {
  EXPECT_EQ(Center(*ResidueVector::Create({0, 4, 5, 7}, M(8))),
            (std::vector<int64_t>{0, 4, -3, -1}));
  EXPECT_EQ(Center(*ResidueVector::Create({0, 1}, M(2))),
            (std::vector<int64_t>{0, 1}));
}

TEST(CenterTest, InverseOfReduceAndConsistentWithRealClip) {
  for (int64_t mv : {2, 8, 1024}) {
    const Modulus m = M(mv);
    std::vector<int64_t> all;
    for (int64_t r = 0; r < mv; ++r) all.push_back(r);
    const auto z = *ResidueVector::Create(all, m);
    const auto c = Center(z);
    EXPECT_EQ(ModReduce(c, m), z);
    for (int64_t v : c) {
      EXPECT_GE(v, 1 - mv / 2);
      EXPECT_LE(v, mv / 2);
    }
    // Integers shifted by half a unit: the real clip range [1/2 - m/2,
    // m/2 + 1/2) holds exactly the centered representatives.
    for (int64_t v = -3 * mv; v <= 3 * mv; ++v) {
      const double clipped = ModClipReal(static_cast<double>(v),
                                         0.5 - mv / 2.0, mv / 2.0 + 0.5);
      const auto centered = Center(ModReduce(std::vector<int64_t>{v}, m));
      EXPECT_EQ(clipped, static_cast<double>(centered[0])) << v;
    }
  }
}

TEST(ModClipRealTest, Examples) {
  EXPECT_EQ(ModClipReal(1.5, -4, 4), 1.5);
  EXPECT_EQ(ModClipReal(5, -4, 4), -3);
  EXPECT_EQ(ModClipReal(-4, -4, 4), -4);
  EXPECT_EQ(ModClipReal(4, -4, 4), -4);
  EXPECT_EQ(ModClipReal(-12.5, -4, 4), 3.5);
}

TEST(ModClipRealTest, Homomorphic) {
  RandomStream rng = MakeStream(2);
  std::uniform_real_distribution<double> dist(-100, 100);
  for (int t = 0; t < 100'000; ++t) {
    const double x = dist(rng), y = dist(rng);
    const double a = -4, b = 4;
    const double lhs = ModClipReal(x + y, a, b);
    const double rhs = ModClipReal(ModClipReal(x, a, b) + ModClipReal(y, a, b), a, b);
    ASSERT_GE(lhs, a);
    ASSERT_LT(lhs, b);
    ASSERT_LE(CircularGap(lhs, rhs, b - a), 1e-9) << x << " " << y;
  }
}

TEST(SecAggTest, StructurallyOnlyConstructibleBySum) {
  static_assert(!std::is_constructible_v<SecAggResult, ResidueVector, int64_t>);
  static_assert(!std::is_default_constructible_v<SecAggResult>);
}

TEST(SecAggTest, Examples) {
  RandomStream rng = MakeStream(3);
  const auto a = *ResidueVector::Create({7}, M(8));
  const auto b = *ResidueVector::Create({3}, M(8));
  std::vector<ResidueVector> two = {a, b};
  auto sum = SecAggSum(two, true, rng);
  ASSERT_TRUE(sum.ok());
  EXPECT_EQ(Residues(sum->sum()), std::vector<int64_t>{2});
  EXPECT_EQ(sum->num_messages(), 2);
  std::vector<ResidueVector> one = {a};
  EXPECT_EQ(SecAggSum(one, true, rng)->sum(), a);
  EXPECT_EQ(SecAggSum(one, false, rng)->sum(), a);
}

TEST(SecAggTest, MaskingNeverChangesAggregate) {
  RandomStream rng = MakeStream(4);
  const Modulus m = M(16);
  std::uniform_int_distribution<int64_t> dist(0, 15);
  for (int t = 0; t < 1000; ++t) {
    std::vector<ResidueVector> msgs;
    std::vector<int64_t> expected(4, 0);
    for (int i = 0; i < 3; ++i) {
      std::vector<int64_t> r(4);
      for (int j = 0; j < 4; ++j) {
        r[j] = dist(rng);
        expected[j] = (expected[j] + r[j]) % 16;
      }
      msgs.push_back(*ResidueVector::Create(r, m));
    }
    auto masked = SecAggSum(msgs, true, rng);
    auto plain = SecAggSum(msgs, false, rng);
    ASSERT_TRUE(masked.ok() && plain.ok());
    ASSERT_EQ(Residues(masked->sum()), expected);
    ASSERT_EQ(masked->sum(), plain->sum());
  }
}

TEST(SecAggTest, MaskedMessagesAreUniform) {
  RandomStream rng = MakeStream(5);
  const Modulus m = M(8);
  const std::vector<ResidueVector> msgs = {
      *ResidueVector::Create({3}, m), *ResidueVector::Create({5}, m),
      *ResidueVector::Create({0}, m)};
  constexpr int kRuns = 80'000;
  std::vector<std::vector<int>> counts(3, std::vector<int>(8, 0));
  for (int t = 0; t < kRuns; ++t) {
    auto masked = MaskMessages(msgs, rng);
    ASSERT_TRUE(masked.ok());
    for (int i = 0; i < 3; ++i) ++counts[i][(*masked)[i].residues()[0]];
  }
  // Chi-square with 7 degrees of freedom; 0.999 quantile is 24.32.
  for (const auto& c : counts) {
    double chi2 = 0;
    for (int v : c) {
      const double e = kRuns / 8.0;
      chi2 += (v - e) * (v - e) / e;
    }
    EXPECT_LT(chi2, 24.32);
  }
}

TEST(SecAggTest, ShapeMismatch) {
  RandomStream rng = MakeStream(6);
  std::vector<ResidueVector> msgs = {*ResidueVector::Create({1, 2}, M(8)),
                                     *ResidueVector::Create({1}, M(8))};
  EXPECT_FALSE(SecAggSum(msgs, false, rng).ok());
  std::vector<ResidueVector> mixed = {*ResidueVector::Create({1}, M(8)),
                                      *ResidueVector::Create({1}, M(16))};
  EXPECT_FALSE(SecAggSum(mixed, true, rng).ok());
  EXPECT_FALSE(SecAggSum({}, true, rng).ok());
}

TEST(ModClipErrorBoundTest, SymmetricFormula) {
  const double r = 10, sigma = 1, log_omega = 0.3;
  auto b = ModClipErrorBound(r, sigma, log_omega);
  ASSERT_TRUE(b.ok());
  const double omega = std::exp(log_omega);
  EXPECT_LE(b->sq_bound, 4 * r * r * omega * 2 * std::exp(-50.0) * (1 + 1e-12));
  EXPECT_NEAR(b->sq_bound / (8 * r * r * omega * std::exp(-50.0)), 1, 1e-12);
  EXPECT_NEAR(b->abs_bound / (4 * r * omega * std::exp(-50.0)), 1, 1e-12);
}

TEST(ModClipErrorBoundTest, VanishesAsSigmaShrinks) {
  double prev = INFINITY;
  for (double sigma : {5.0, 2.0, 1.0, 0.5, 0.1}) {
    auto b = ModClipErrorBound(5, sigma, 0);
    ASSERT_TRUE(b.ok());
    EXPECT_LT(b->sq_bound, prev);
    prev = b->sq_bound;
  }
  EXPECT_EQ(prev, 0);
  EXPECT_FALSE(ModClipErrorBound(5, 6, 0).ok());
}

}  // namespace
}  // namespace ddg
