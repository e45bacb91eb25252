#include "hipyr/translator.hpp"

#include <string>

#include "hipyr/errors.hpp"

namespace hipyr::translator {

namespace nn = torch::nn;
namespace F = torch::nn::functional;

namespace {

constexpr double kLeakySlope = 0.2;
constexpr int64_t kRefinerWidth = 16;

torch::Tensor lrelu(const torch::Tensor& x) {
  return F::leaky_relu(x, F::LeakyReLUFuncOptions().negative_slope(kLeakySlope));
}

nn::Conv2d conv3x3(int64_t in, int64_t out) {
  return nn::Conv2d(nn::Conv2dOptions(in, out, 3).padding(1));
}

nn::Conv2d conv1x1(int64_t in, int64_t out) { return nn::Conv2d(nn::Conv2dOptions(in, out, 1)); }

torch::Tensor as_batch(const torch::Tensor& t) { return t.dim() == 3 ? t.unsqueeze(0) : t; }

}  // namespace

void TranslatorConfig::validate() const {
  if (ltm_blocks < 1) throw ConfigError("ltm_blocks must be >= 1");
  if (utm_blocks < 1) throw ConfigError("utm_blocks must be >= 1");
  if (base_channels < 1) throw ConfigError("base_channels must be >= 1");
  if (levels < pyramid::kMinLevels || levels > pyramid::kMaxLevels) {
    throw ConfigError("pyramid levels must be in [2,5]");
  }
  hypernet.validate();
}

ResidualBlockImpl::ResidualBlockImpl(int64_t channels)
    : conv1_(register_module("conv1", conv3x3(channels, channels))),
      conv2_(register_module("conv2", conv3x3(channels, channels))) {}

torch::Tensor ResidualBlockImpl::forward(const torch::Tensor& x) {
  return x + conv2_(lrelu(conv1_(x)));
}

LowTranslatorImpl::LowTranslatorImpl(int blocks, int64_t channels)
    : conv_in_(register_module("conv_in", conv3x3(3, channels))),
      conv_out_(register_module("conv_out", conv3x3(channels, 3))),
      blocks_(register_module("blocks", nn::Sequential())) {
  for (int i = 0; i < blocks; ++i) blocks_->push_back(ResidualBlock(channels));
  torch::NoGradGuard no_grad;
  conv_out_->weight.mul_(0.1);
  conv_out_->bias.zero_();
}

torch::Tensor LowTranslatorImpl::forward(const torch::Tensor& base) {
  auto x = as_batch(base);
  auto out = x + conv_out_(blocks_->forward(lrelu(conv_in_(x))));
  return base.dim() == 3 ? out.squeeze(0) : out;
}

HighTranslatorImpl::HighTranslatorImpl(int blocks, int64_t channels, int levels)
    : levels_(levels),
      mask_in_(register_module("mask_in", conv3x3(9, channels))),
      mask_out_(register_module("mask_out", conv3x3(channels, 1))),
      mask_blocks_(register_module("mask_blocks", nn::Sequential())) {
  for (int i = 0; i < blocks; ++i) mask_blocks_->push_back(ResidualBlock(channels));
  // Masks start close to 1 so the untrained model passes detail through.
  torch::NoGradGuard no_grad;
  mask_out_->weight.mul_(0.1);
  mask_out_->bias.fill_(1.0);
  for (int i = 0; i + 2 < levels; ++i) {
    auto in = register_module("refine_in_" + std::to_string(i), conv1x1(1, kRefinerWidth));
    auto out = register_module("refine_out_" + std::to_string(i), conv1x1(kRefinerWidth, 1));
    out->weight.mul_(0.1);
    out->bias.zero_();
    refine_in_.push_back(in);
    refine_out_.push_back(out);
  }
}

pyramid::Pyramid HighTranslatorImpl::forward(const pyramid::Pyramid& pyr_in,
                                             const torch::Tensor& base_out) {
  pyramid::check_pyramid(pyr_in);
  if (static_cast<int>(pyr_in.levels()) != levels_) {
    throw DimensionError("UTM built for " + std::to_string(levels_) + " levels, got " +
                         std::to_string(pyr_in.levels()));
  }
  if (!base_out.sizes().equals(pyr_in.base().sizes())) {
    throw DimensionError("translated base does not match the input base shape");
  }
  const std::size_t coarse = pyr_in.levels() - 2;
  const auto band_size = pyramid::spatial_size(pyr_in.bands[coarse]);
  auto coarse_band = as_batch(pyr_in.bands[coarse]);
  auto features = torch::cat({coarse_band, as_batch(pyramid::upsample(pyr_in.base(), band_size)),
                              as_batch(pyramid::upsample(base_out, band_size))},
                             1);
  auto mask = mask_out_(mask_blocks_->forward(lrelu(mask_in_(features))));

  std::vector<torch::Tensor> masks(pyr_in.levels() - 1);
  masks[coarse] = mask;
  for (std::size_t level = coarse; level-- > 0;) {
    auto up = pyramid::upsample(mask, pyramid::spatial_size(pyr_in.bands[level]));
    mask = up + refine_out_[level](lrelu(refine_in_[level](up)));
    masks[level] = mask;
  }

  pyramid::Pyramid out;
  out.source_size = pyr_in.source_size;
  const bool single = pyr_in.bands[0].dim() == 3;
  for (std::size_t level = 0; level + 1 < pyr_in.levels(); ++level) {
    auto translated = as_batch(pyr_in.bands[level]) * masks[level];
    out.bands.push_back(single ? translated.squeeze(0) : translated);
  }
  out.bands.push_back(base_out);
  last_masks_ = std::move(masks);
  return out;
}

HipyrNetImpl::HipyrNetImpl(TranslatorConfig config) : config_(config) {
  config_.validate();
  hypernet_ = register_module("hypernet", hypernet::HyperNet(config_.hypernet));
  ltm_ = register_module("ltm", LowTranslator(config_.ltm_blocks, config_.base_channels));
  utm_ = register_module("utm",
                         HighTranslator(config_.utm_blocks, config_.base_channels, config_.levels));
}

GeneratorOutput HipyrNetImpl::forward(const torch::Tensor& image) {
  return forward_with_kernel(image, hypernet_->forward(image));
}

GeneratorOutput HipyrNetImpl::forward_with_kernel(const torch::Tensor& image,
                                                  const torch::Tensor& kernel) {
  GeneratorOutput out;
  out.predicted_kernel = kernel;
  out.pyramid_in = pyramid::decompose(image, kernel, config_.levels);
  auto base_out = ltm_->forward(out.pyramid_in.base());
  out.pyramid_out = utm_->forward(out.pyramid_in, base_out);
  out.enhanced = pyramid::reconstruct(out.pyramid_out);
  return out;
}

torch::Tensor translate_low(LowTranslator& ltm, const torch::Tensor& base) {
  return ltm->forward(base);
}

pyramid::Pyramid translate_high(HighTranslator& utm, const pyramid::Pyramid& pyr_in,
                                const torch::Tensor& base_out) {
  return utm->forward(pyr_in, base_out);
}

}  // namespace hipyr::translator
