#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "hipyr/errors.hpp"
#include "hipyr/hypernet.hpp"
#include "hipyr/losses.hpp"
#include "hipyr/metrics.hpp"
#include "oracles.hpp"

namespace hl = hipyr::losses;
namespace hm = hipyr::metrics;

namespace {

double scalar(const torch::Tensor& t) { return t.item<double>(); }

torch::Tensor pattern(int64_t phase) {
  auto y = torch::arange(16, torch::kFloat64).view({1, 16, 1});
  auto x = torch::arange(16, torch::kFloat64).view({1, 1, 16});
  auto c = torch::arange(3, torch::kFloat64).view({3, 1, 1});
  return 0.5 + 0.4 * torch::sin(0.37 * x + 0.23 * y * (phase + 1) + c + phase);
}

}  // namespace

TEST(GanLoss, NamesRoundTrip) {
  for (auto t : hl::kAllGanTypes) EXPECT_EQ(hl::parse_gan_type(hl::to_string(t)), t);
  EXPECT_EQ(hl::to_string(hl::GanType::kWganSoftplus), "wgan_softplus");
  EXPECT_EQ(hl::display_name(hl::GanType::kLsgan), "LS-GAN");
  EXPECT_THROW(hl::parse_gan_type("relativistic"), hipyr::ConfigError);
}

TEST(GanLoss, ClosedFormValues) {
  auto zero = torch::zeros({1, 1, 4, 4}, torch::kFloat64);
  EXPECT_NEAR(scalar(hl::gan_generator_loss(zero, hl::GanType::kVanilla)), std::log(2.0), 1e-12);
  EXPECT_NEAR(scalar(hl::gan_discriminator_loss(zero, zero, hl::GanType::kVanilla)),
              2.0 * std::log(2.0), 1e-12);
  auto two = torch::full({4}, 2.0, torch::kFloat64);
  EXPECT_EQ(scalar(hl::gan_discriminator_loss(two, -two, hl::GanType::kHinge)), 0.0);
  auto scores = torch::tensor({1.0, 3.0}, torch::kFloat64);
  EXPECT_EQ(scalar(hl::gan_generator_loss(scores, hl::GanType::kWgan)), -2.0);
  EXPECT_EQ(scalar(hl::gan_generator_loss(scores, hl::GanType::kLsgan)), 2.0);
  EXPECT_EQ(scalar(hl::gan_discriminator_loss(scores, scores, hl::GanType::kWgan)), 0.0);
  EXPECT_EQ(scalar(hl::gan_discriminator_loss(torch::ones({3}), torch::zeros({3}),
                                              hl::GanType::kLsgan)),
            0.0);
}

TEST(GanLoss, SoftplusIsStableForLargeScores) {
  auto big = torch::tensor({-200.0, 200.0}, torch::kFloat64);
  auto g = hl::gan_generator_loss(big, hl::GanType::kWganSoftplus);
  EXPECT_TRUE(std::isfinite(scalar(g)));
  EXPECT_NEAR(scalar(g), 100.0, 1e-9);
}

TEST(GanLoss, GeneratorGradientsMatchFiniteDifferences) {
  torch::manual_seed(8);
  for (auto type : hl::kAllGanTypes) {
    auto d = (torch::randn({2, 1, 3, 3}, torch::kFloat64) * 1.5).requires_grad_(true);
    hl::gan_generator_loss(d, type).backward();
    auto grad = d.grad().clone();
    for (int64_t i = 0; i < d.numel(); ++i) {
      auto numeric = oracle::central_difference(
          d, i, 1e-6, [&] { return scalar(hl::gan_generator_loss(d, type)); });
      EXPECT_LE(oracle::relative_error(grad.view({-1})[i].item<double>(), numeric), 1e-6)
          << hl::to_string(type) << " entry " << i;
    }
  }
}

TEST(GanLoss, DiscriminatorGradientsMatchFiniteDifferences) {
  torch::manual_seed(9);
  for (auto type : hl::kAllGanTypes) {
    // Keep hinge scores away from the kinks at +-1.
    auto real = (torch::randn({6}, torch::kFloat64) * 0.3 + 0.2).requires_grad_(true);
    auto fake = (torch::randn({6}, torch::kFloat64) * 0.3 - 0.2).requires_grad_(true);
    hl::gan_discriminator_loss(real, fake, type).backward();
    for (auto* t : {&real, &fake}) {
      auto grad = t->grad().clone();
      for (int64_t i = 0; i < t->numel(); ++i) {
        auto numeric = oracle::central_difference(
            *t, i, 1e-6, [&] { return scalar(hl::gan_discriminator_loss(real, fake, type)); });
        EXPECT_LE(oracle::relative_error(grad[i].item<double>(), numeric), 1e-6)
            << hl::to_string(type);
      }
    }
  }
}

TEST(PixelLoss, IsMeanSquaredError) {
  auto a = pattern(0), b = pattern(1);
  EXPECT_NEAR(scalar(hl::pixel_loss(a, b)), oracle::mse(oracle::from_tensor(a),
                                                       oracle::from_tensor(b)), 1e-15);
  EXPECT_THROW(hl::pixel_loss(a, b.slice(1, 0, 8)), hipyr::DimensionError);
}

TEST(KernelLoss, ZeroAtAnchorAndBroadcastsOverBatch) {
  auto anchor = hipyr::hypernet::gaussian_anchor(torch::kFloat64);
  EXPECT_EQ(scalar(hl::kernel_loss(anchor, anchor)), 0.0);
  auto batch = torch::stack({anchor, anchor + 0.1});
  EXPECT_NEAR(scalar(hl::kernel_loss(batch, anchor)), 0.005, 1e-15);
}

TEST(TotalLoss, WeightedSumAndNonFiniteRejection) {
  hl::LossWeights w;
  auto b = hl::total_generator_loss(0.7, 0.002, 0.01, w);
  EXPECT_DOUBLE_EQ(b.l_total, 0.7 + 1000.0 * 0.002 + 0.01 * 0.01);
  EXPECT_THROW(hl::total_generator_loss(std::numeric_limits<double>::quiet_NaN(), 0, 0, w),
               hipyr::NumericError);
  EXPECT_THROW(hl::total_generator_loss(0, std::numeric_limits<double>::infinity(), 0, w),
               hipyr::NumericError);
  hl::LossWeights bad{-1.0, 0.01};
  EXPECT_THROW(bad.validate(), hipyr::ConfigError);
}

TEST(Psnr, MatchesLoopOracle) {
  for (int64_t p = 0; p < 4; ++p) {
    auto a = pattern(p), b = pattern(p + 1);
    EXPECT_NEAR(hm::psnr(a, b), oracle::psnr(oracle::from_tensor(a), oracle::from_tensor(b)), 1e-9);
  }
}

TEST(Psnr, KnownValues) {
  auto zero = torch::zeros({3, 16, 16});
  EXPECT_NEAR(hm::psnr(zero, torch::full({3, 16, 16}, 0.1)), 20.0, 1e-6);
  EXPECT_EQ(hm::psnr(zero, zero), hm::kPsnrCap);
  EXPECT_NEAR(hm::psnr(zero, torch::full({3, 16, 16}, 25.5), 255.0), 20.0, 1e-6);
  EXPECT_THROW(hm::psnr(zero, torch::zeros({3, 16, 8})), hipyr::DimensionError);
}

TEST(Ssim, MatchesLoopOracle) {
  for (int64_t p = 0; p < 4; ++p) {
    auto a = pattern(p), b = pattern(p + 2);
    EXPECT_NEAR(hm::ssim(a, b), oracle::ssim(oracle::from_tensor(a), oracle::from_tensor(b)), 1e-9);
  }
  torch::manual_seed(10);
  auto a = torch::rand({3, 24, 20}), b = torch::rand({3, 24, 20});
  EXPECT_NEAR(hm::ssim(a, b), oracle::ssim(oracle::from_tensor(a), oracle::from_tensor(b)), 1e-9);
}

TEST(Ssim, IdentityAndBounds) {
  auto a = pattern(3);
  EXPECT_EQ(hm::ssim(a, a), 1.0);
  EXPECT_EQ(hm::ssim(a.unsqueeze(0), a.unsqueeze(0)), 1.0);
  EXPECT_LT(hm::ssim(a, 1.0 - a), 0.0);
  EXPECT_THROW(hm::ssim(torch::rand({3, 10, 16}), torch::rand({3, 10, 16})), hipyr::DimensionError);
}

TEST(MetricReport, FinalizeAveragesPerImage) {
  hm::MetricReport r;
  hm::finalize(r);
  EXPECT_FALSE(r.psnr_db.has_value());
  r.per_image = {{"a", 20.0, 0.5}, {"b", 30.0, 0.7}};
  hm::finalize(r);
  EXPECT_DOUBLE_EQ(*r.psnr_db, 25.0);
  EXPECT_DOUBLE_EQ(*r.ssim, 0.6);
}
