#pragma once

#include <vector>

#include <torch/torch.h>

#include "hipyr/hypernet.hpp"
#include "hipyr/pyramid.hpp"

namespace hipyr::translator {

struct TranslatorConfig {
  int ltm_blocks = 2;
  int utm_blocks = 4;
  int64_t base_channels = 16;
  int levels = pyramid::kDefaultLevels;
  hypernet::HyperNetConfig hypernet{};

  void validate() const;
};

/// conv3x3 -> leaky ReLU -> conv3x3, plus the identity skip.
class ResidualBlockImpl : public torch::nn::Module {
 public:
  explicit ResidualBlockImpl(int64_t channels);
  torch::Tensor forward(const torch::Tensor& x);

 private:
  torch::nn::Conv2d conv1_{nullptr}, conv2_{nullptr};
};
TORCH_MODULE(ResidualBlock);

/// Lower translational module: residual translation of the low-pass base.
/// out = base + conv_out(blocks(lrelu(conv_in(base)))).
class LowTranslatorImpl : public torch::nn::Module {
 public:
  LowTranslatorImpl(int blocks, int64_t channels);
  torch::Tensor forward(const torch::Tensor& base);

  torch::nn::Conv2d& conv_out() { return conv_out_; }

 private:
  torch::nn::Conv2d conv_in_{nullptr}, conv_out_{nullptr};
  torch::nn::Sequential blocks_{nullptr};
};
TORCH_MODULE(LowTranslator);

/// Upper translational module: multiplicative masks for the residual bands.
///
/// The mask network sees [h_coarse, up(base_in), up(base_out)] at the
/// coarsest residual level and emits a one-channel mask. Each finer level
/// upsamples the previous mask and passes it through a residual 1x1 refiner.
/// Translated band = band * mask (broadcast over channels).
class HighTranslatorImpl : public torch::nn::Module {
 public:
  HighTranslatorImpl(int blocks, int64_t channels, int levels);

  /// Returns {translated residuals..., base_out}.
  pyramid::Pyramid forward(const pyramid::Pyramid& pyr_in, const torch::Tensor& base_out);

  /// Masks from the last forward call, finest first (for inspection).
  const std::vector<torch::Tensor>& last_masks() const { return last_masks_; }

  torch::nn::Conv2d& mask_head() { return mask_out_; }
  /// Refiner output convs, index 0 refines the finest level.
  std::vector<torch::nn::Conv2d>& refiner_heads() { return refine_out_; }

 private:
  int levels_;
  torch::nn::Conv2d mask_in_{nullptr}, mask_out_{nullptr};
  torch::nn::Sequential mask_blocks_{nullptr};
  std::vector<torch::nn::Conv2d> refine_in_, refine_out_;
  std::vector<torch::Tensor> last_masks_;
};
TORCH_MODULE(HighTranslator);

struct GeneratorOutput {
  torch::Tensor enhanced;          // unclamped, same size as the input
  torch::Tensor predicted_kernel;  // (N,5,5) or (5,5)
  pyramid::Pyramid pyramid_in;
  pyramid::Pyramid pyramid_out;
};

/// Hypernet + kernel pyramid + LTM/UTM translation + reconstruction.
class HipyrNetImpl : public torch::nn::Module {
 public:
  explicit HipyrNetImpl(TranslatorConfig config = {});

  GeneratorOutput forward(const torch::Tensor& image);

  /// Decompose/translate/reconstruct with a caller-supplied kernel, bypassing
  /// the hypernet.
  GeneratorOutput forward_with_kernel(const torch::Tensor& image, const torch::Tensor& kernel);

  const TranslatorConfig& config() const { return config_; }
  hypernet::HyperNet& hypernet() { return hypernet_; }
  LowTranslator& ltm() { return ltm_; }
  HighTranslator& utm() { return utm_; }

 private:
  TranslatorConfig config_;
  hypernet::HyperNet hypernet_{nullptr};
  LowTranslator ltm_{nullptr};
  HighTranslator utm_{nullptr};
};
TORCH_MODULE(HipyrNet);

torch::Tensor translate_low(LowTranslator& ltm, const torch::Tensor& base);
pyramid::Pyramid translate_high(HighTranslator& utm, const pyramid::Pyramid& pyr_in,
                                const torch::Tensor& base_out);

}  // namespace hipyr::translator
