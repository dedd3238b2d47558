// Copyright 2026 The Compx Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "compx/metrics.h"
#include "oracles.h"
#include "test_util.h"

namespace compx::metrics {
namespace {

using compx::testing::random_image;
using compx::testing::random_rd_curve;
using compx::testing::random_roi;
using compx::testing::wpsnr_oracle;
using imaging::ImageBuffer;

TEST(Psnr, IdenticalIsInfinite) {
  std::mt19937 rng(1);
  const auto a = random_image(rng, 8, 8);
  EXPECT_EQ(psnr(a, a), kInfinity);
  EXPECT_EQ(format_db(psnr(a, a)), "inf");
}

TEST(Psnr, ConstantOffset) {
  ImageBuffer a(4, 4, 3), b(4, 4, 3);
  std::fill(b.data().begin(), b.data().end(), 16);
  EXPECT_NEAR(psnr(a, b), 10.0 * std::log10(65025.0 / 256.0), 1e-12);
  EXPECT_NEAR(psnr(a, b), 24.05, 0.005);
}

TEST(Psnr, ExtremesGiveZero) {
  ImageBuffer a(1, 1, 1), b(1, 1, 1);
  b.at(0, 0) = 255;
  EXPECT_DOUBLE_EQ(psnr(a, b), 0.0);
}

TEST(Psnr, DimensionMismatch) {
  EXPECT_COMPX_ERROR(psnr(ImageBuffer(2, 2, 1), ImageBuffer(2, 3, 1)),
                     ErrorCode::kDimensionMismatch);
  EXPECT_COMPX_ERROR(psnr(ImageBuffer(2, 2, 1), ImageBuffer(2, 2, 3)),
                     ErrorCode::kDimensionMismatch);
}

TEST(Psnr, StrictlyDecreasingInError) {
  std::mt19937 rng(5);
  const auto a = random_image(rng, 8, 8, 1);
  ImageBuffer b = a;
  double prev = kInfinity;
  for (int step = 0; step < 20; ++step) {
    auto& v = b.at(3, 3);
    v = v < 128 ? static_cast<uint8_t>(a.at(3, 3) + step + 1)
                : static_cast<uint8_t>(a.at(3, 3) - step - 1);
    const double p = psnr(a, b);
    ASSERT_LT(p, prev);
    prev = p;
  }
}

TEST(WeightedPsnr, HandComputedExample) {
  ImageBuffer a(2, 2, 1), b(2, 2, 1);
  b.at(0, 0) = 2;
  b.at(1, 0) = 1;
  b.at(0, 1) = 1;
  b.at(1, 1) = 1;
  const std::vector<uint8_t> roi{1, 0, 0, 0};
  const double wmse = (0.8 * 4 + 0.2 * 3) / (0.8 * 1 + 0.2 * 3);
  EXPECT_NEAR(wmse, 2.714286, 1e-6);
  const double got = weighted_psnr(a, b, roi, {0.8, 0.2});
  EXPECT_NEAR(got, 10.0 * std::log10(65025.0 / wmse), 1e-12);
  EXPECT_NEAR(got, 43.80, 0.01);
}

TEST(WeightedPsnr, MatchesOracle) {
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const uint32_t ch = trial % 2 ? 3 : 1;
    const auto a = random_image(rng, 16, 16, ch);
    const auto b = random_image(rng, 16, 16, ch);
    const auto roi = random_roi(rng, 256);
    const double alpha = u(rng);
    const double got = weighted_psnr(a, b, roi, {alpha, 1.0 - alpha});
    ASSERT_NEAR(got, wpsnr_oracle(a, b, roi, alpha, 1.0 - alpha), 1e-9);
  }
}

TEST(WeightedPsnr, EqualWeightsIsPsnr) {
  std::mt19937 rng(43);
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = random_image(rng, 16, 16);
    const auto b = random_image(rng, 16, 16);
    ASSERT_NEAR(weighted_psnr(a, b, random_roi(rng, 256), {0.5, 0.5}), psnr(a, b), 1e-12);
  }
}

TEST(WeightedPsnr, EmptyRegionAllowed) {
  std::mt19937 rng(3);
  const auto a = random_image(rng, 4, 4);
  const auto b = random_image(rng, 4, 4);
  const std::vector<uint8_t> none(16, 0);
  EXPECT_NEAR(weighted_psnr(a, b, none, {0.8, 0.2}), psnr(a, b), 1e-12);
  EXPECT_EQ(weighted_psnr(a, a, none, {0.8, 0.2}), kInfinity);
}

TEST(WeightedPsnr, Errors) {
  const ImageBuffer a(2, 2, 1), b(2, 2, 1);
  EXPECT_COMPX_ERROR(weighted_psnr(a, b, std::vector<uint8_t>{0, 1, 2, 0}, {0.5, 0.5}),
                     ErrorCode::kNonBinaryMask);
  EXPECT_COMPX_ERROR(weighted_psnr(a, b, std::vector<uint8_t>{0, 1}, {0.5, 0.5}),
                     ErrorCode::kDimensionMismatch);
  EXPECT_COMPX_ERROR(weighted_psnr(a, b, std::vector<uint8_t>(4, 0), {0.8, 0.3}),
                     ErrorCode::kRatioSumViolation);
  EXPECT_COMPX_ERROR((RoiWeights{-0.1, 1.1}.validate()), ErrorCode::kRatioSumViolation);
}

TEST(Bpp, Arithmetic) {
  EXPECT_DOUBLE_EQ(bpp(393216, 768, 512), 1.0);
  EXPECT_DOUBLE_EQ(bpp(8, 1, 1), 8.0);
  EXPECT_DOUBLE_EQ(bpp_of_bytes(1, 1, 1), 8.0);
  EXPECT_COMPX_ERROR(bpp(8, 0, 1), ErrorCode::kZeroDims);
}

std::vector<RdPoint> curve(std::initializer_list<std::pair<double, double>> pts) {
  std::vector<RdPoint> out;
  for (auto [r, m] : pts) out.push_back({r, m});
  return out;
}

const auto kRef = curve({{0.1, 28.0}, {0.25, 31.5}, {0.5, 34.2}, {1.0, 37.0}});
const auto kTest = curve({{0.12, 28.9}, {0.3, 32.6}, {0.6, 35.4}, {1.1, 38.1}});

TEST(BdDelta, IdenticalCurvesAreZero) {
  EXPECT_NEAR(bd_delta(kRef, kRef, BdMode::kPsnr), 0.0, 1e-12);
  EXPECT_NEAR(bd_delta(kRef, kRef, BdMode::kRate), 0.0, 1e-12);
}

TEST(BdDelta, ConstantShift) {
  auto shifted = kRef;
  for (auto& p : shifted) p.metric += 1.0;
  EXPECT_NEAR(bd_delta(kRef, shifted, BdMode::kPsnr), 1.0, 1e-9);
}

TEST(BdDelta, HalvedRate) {
  auto cheaper = kRef;
  for (auto& p : cheaper) p.bpp *= 0.5;
  EXPECT_NEAR(bd_delta(kRef, cheaper, BdMode::kRate), -50.0, 1e-9);
}

// Frozen from scipy.interpolate.PchipInterpolator.integrate on the same
// points (independent implementation of the same interpolant).
TEST(BdDelta, MatchesScipyReference) {
  EXPECT_NEAR(bd_delta(kRef, kTest, BdMode::kPsnr), 0.4082694647335509, 1e-12);
  EXPECT_NEAR(bd_delta(kRef, kTest, BdMode::kRate), -9.538291157626889, 1e-9);
}

TEST(BdDelta, AntiSymmetric) {
  EXPECT_NEAR(bd_delta(kRef, kTest, BdMode::kPsnr), -bd_delta(kTest, kRef, BdMode::kPsnr),
              1e-9);
}

TEST(BdDelta, Errors) {
  const auto far = curve({{10, 40}, {20, 41}, {30, 42}, {40, 43}});
  EXPECT_COMPX_ERROR(bd_delta(kRef, far, BdMode::kPsnr), ErrorCode::kNoOverlap);
  const auto three = curve({{0.1, 28}, {0.2, 30}, {0.3, 31}});
  EXPECT_COMPX_ERROR(bd_delta(kRef, three, BdMode::kPsnr), ErrorCode::kDegenerateCurve);
  const auto unsorted = curve({{0.1, 28}, {0.3, 30}, {0.2, 31}, {0.4, 32}});
  EXPECT_COMPX_ERROR(bd_delta(kRef, unsorted, BdMode::kPsnr), ErrorCode::kDegenerateCurve);
  const auto falling = curve({{0.1, 28}, {0.2, 30}, {0.3, 29}, {0.4, 32}});
  EXPECT_COMPX_ERROR(validate_curve(falling), ErrorCode::kDegenerateCurve);
  const auto slack = curve({{0.1, 28}, {0.2, 30}, {0.3, 29.95}, {0.4, 32}});
  EXPECT_NO_THROW(validate_curve(slack));
  EXPECT_COMPX_ERROR(bd_delta(kRef, slack, BdMode::kRate), ErrorCode::kDegenerateCurve);
}

TEST(BdDelta, DenseIntegrationOracle) {
  std::mt19937 rng(1234);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = random_rd_curve(rng), b = random_rd_curve(rng);
    const double expect = compx::testing::dense_bd_psnr(a, b, 10000);
    if (std::isnan(expect)) continue;
    const double got = bd_delta(a, b, BdMode::kPsnr);
    worst = std::max(worst, std::fabs(got - expect));
    ASSERT_NEAR(got, expect, 1e-6) << "trial " << trial;
    // The gap is trapezoid discretization error; it shrinks as h^2.
    const double fine = compx::testing::dense_bd_psnr(a, b, 100000);
    ASSERT_NEAR(got, fine, 1e-9) << "trial " << trial;
  }
  RecordProperty("worst_abs_error", std::to_string(worst));
  std::printf("dense-oracle worst abs error: %.3e dB\n", worst);
}

TEST(Pchip, InterpolatesNodesAndIsMonotone) {
  const Pchip p({0, 1, 2, 3, 4}, {0, 1, 1, 3, 3.5});
  const std::vector<double> ys{0, 1, 1, 3, 3.5};
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(p(i), ys[i], 1e-12);
  double prev = p(0);
  for (int k = 1; k <= 400; ++k) {
    const double v = p(k / 100.0);
    ASSERT_GE(v, prev - 1e-12);
    prev = v;
  }
  EXPECT_NEAR(p(1.5), 1.0, 1e-12);  // flat segment stays flat
}

TEST(FormatDb, Decimals) {
  EXPECT_EQ(format_db(28.61744, 4), "28.6174");
  EXPECT_EQ(format_db(kInfinity), "inf");
}

}  // namespace
}  // namespace compx::metrics
