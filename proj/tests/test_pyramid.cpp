#include <gtest/gtest.h>

#include <limits>

#include "hipyr/errors.hpp"
#include "hipyr/hypernet.hpp"
#include "hipyr/pyramid.hpp"
#include "oracles.hpp"

namespace hp = hipyr::pyramid;

namespace {

torch::Tensor random_kernel(torch::Dtype dtype = torch::kFloat64) {
  auto k = torch::rand({5, 5}, dtype) + 0.05;
  return k / k.sum();
}

void expect_matches(const oracle::Image& expected, const torch::Tensor& actual, double tol) {
  const auto got = oracle::from_tensor(actual);
  ASSERT_EQ(got.c, expected.c);
  ASSERT_EQ(got.h, expected.h);
  ASSERT_EQ(got.w, expected.w);
  for (std::size_t i = 0; i < got.v.size(); ++i) {
    ASSERT_NEAR(got.v[i], expected.v[i], tol) << "at flat index " << i;
  }
}

}  // namespace

TEST(Downsample, MatchesBruteForceOnRandomInputs) {
  torch::manual_seed(11);
  for (int trial = 0; trial < 5; ++trial) {
    auto image = torch::rand({3, 16, 12}, torch::kFloat64);
    auto kernel = random_kernel();
    auto expected =
        oracle::downsample(oracle::from_tensor(image), oracle::kernel_from_tensor(kernel));
    expect_matches(expected, hp::downsample(image, kernel), 1e-12);
  }
}

TEST(Downsample, AsymmetricKernelUsesCrossCorrelation) {
  auto image = torch::arange(64, torch::kFloat64).reshape({1, 8, 8});
  auto kernel = torch::zeros({5, 5}, torch::kFloat64);
  kernel[2][3] = 1.0;  // picks in(2y, 2x + 1)
  auto out = hp::downsample(image, kernel);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) EXPECT_EQ(out[0][y][x].item<double>(), 8.0 * 2 * y + 2 * x + 1);
}

TEST(Downsample, PerSampleKernelsMatchIndividualCalls) {
  torch::manual_seed(3);
  auto batch = torch::rand({2, 3, 8, 8});
  auto kernels = torch::stack({random_kernel(torch::kFloat32), random_kernel(torch::kFloat32)});
  auto out = hp::downsample(batch, kernels);
  for (int n = 0; n < 2; ++n) {
    EXPECT_TRUE(torch::allclose(out[n], hp::downsample(batch[n], kernels[n]), 1e-6, 1e-7));
  }
}

TEST(Downsample, RejectsOddOrTinyInputs) {
  auto k = hipyr::hypernet::gaussian_anchor();
  EXPECT_THROW(hp::downsample(torch::rand({3, 7, 8}), k), hipyr::DimensionError);
  EXPECT_THROW(hp::downsample(torch::rand({3, 2, 2}), k), hipyr::DimensionError);
  EXPECT_THROW(hp::downsample(torch::rand({3, 8, 8}), torch::rand({3, 3})), hipyr::ShapeError);
}

TEST(Downsample, RejectsNonFiniteKernel) {
  auto k = hipyr::hypernet::gaussian_anchor().clone();
  k[0][0] = std::numeric_limits<float>::quiet_NaN();
  EXPECT_THROW(hp::downsample(torch::rand({3, 8, 8}), k), hipyr::NumericError);
}

TEST(Upsample, MatchesCubicConvolutionReference) {
  torch::manual_seed(5);
  auto image = torch::rand({2, 5, 7}, torch::kFloat64);
  auto expected = oracle::upsample2(oracle::from_tensor(image));
  expect_matches(expected, hp::upsample(image, {10, 14}), 1e-12);
}

TEST(Upsample, ConstantImageStaysConstant) {
  auto out = hp::upsample(torch::full({3, 4, 4}, 0.25, torch::kFloat64), {8, 8});
  EXPECT_LT((out - 0.25).abs().max().item<double>(), 1e-15);
}

TEST(Upsample, RequiresExactDoubling) {
  EXPECT_THROW(hp::upsample(torch::rand({3, 4, 4}), {8, 9}), hipyr::DimensionError);
  EXPECT_THROW(hp::upsample(torch::rand({3, 1, 4}), {2, 8}), hipyr::DimensionError);
}

TEST(Decompose, BandsMatchComposedOracle) {
  torch::manual_seed(7);
  auto image = torch::rand({3, 32, 24}, torch::kFloat64);
  auto kernel = random_kernel();
  auto expected =
      oracle::decompose(oracle::from_tensor(image), oracle::kernel_from_tensor(kernel), 3);
  auto pyr = hp::decompose(image, kernel, 3);
  ASSERT_EQ(pyr.levels(), 3u);
  EXPECT_EQ(pyr.residual_count(), 2u);
  for (std::size_t i = 0; i < 3; ++i) expect_matches(expected[i], pyr.bands[i], 1e-12);
  EXPECT_EQ(pyr.base().size(1), 8);
  EXPECT_EQ(pyr.base().size(2), 6);
}

TEST(Decompose, ReconstructionIsExactForAnyKernel) {
  torch::manual_seed(9);
  for (int levels = hp::kMinLevels; levels <= hp::kMaxLevels; ++levels) {
    auto image = torch::rand({2, 3, 64, 64});
    auto kernel = random_kernel(torch::kFloat32) + 0.02 * torch::randn({5, 5});
    auto back = hp::reconstruct(hp::decompose(image, kernel, levels));
    EXPECT_LE((back - image).abs().max().item<float>(), 1e-5f) << "levels " << levels;
  }
}

TEST(Decompose, ReconstructionIsExactForUnnormalizedKernels) {
  torch::manual_seed(10);
  for (int levels = hp::kMinLevels; levels <= hp::kMaxLevels; ++levels) {
    auto image = torch::rand({1, 3, 64, 64}, torch::kFloat64);
    auto back = hp::reconstruct(hp::decompose(image, torch::randn({5, 5}, torch::kFloat64), levels));
    EXPECT_LE((back - image).abs().max().item<double>(), 1e-10) << "levels " << levels;
  }
}

TEST(Decompose, NormalizedKernelLeavesNoResidualOnFlatImage) {
  auto flat = torch::full({3, 32, 32}, 0.4, torch::kFloat64);
  auto pyr = hp::decompose(flat, hipyr::hypernet::gaussian_anchor(torch::kFloat64));
  for (std::size_t i = 0; i < pyr.residual_count(); ++i) {
    EXPECT_LT(pyr.bands[i].abs().max().item<double>(), 1e-15);
  }
  EXPECT_LT((pyr.base() - 0.4).abs().max().item<double>(), 1e-15);
}

TEST(Decompose, RejectsIndivisibleSizesAndBadLevels) {
  auto k = hipyr::hypernet::gaussian_anchor();
  EXPECT_THROW(hp::decompose(torch::rand({3, 36, 30}), k, 3), hipyr::DimensionError);
  EXPECT_THROW(hp::decompose(torch::rand({3, 64, 64}), k, 1), hipyr::DimensionError);
  EXPECT_THROW(hp::decompose(torch::rand({3, 64, 64}), k, 6), hipyr::DimensionError);
  EXPECT_THROW(hp::decompose(torch::rand({64, 64}), k, 3), hipyr::DimensionError);
}

TEST(Reconstruct, RejectsInconsistentBands) {
  auto pyr = hp::decompose(torch::rand({3, 32, 32}), hipyr::hypernet::gaussian_anchor());
  pyr.bands[1] = torch::rand({3, 10, 10});
  EXPECT_THROW(hp::check_pyramid(pyr), hipyr::DimensionError);
  EXPECT_THROW(hp::reconstruct(pyr), hipyr::DimensionError);
}
