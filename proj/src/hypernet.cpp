#include "hipyr/hypernet.hpp"

#include <string>

#include "hipyr/errors.hpp"
#include "hipyr/pyramid.hpp"

namespace hipyr::hypernet {

namespace nn = torch::nn;
namespace F = torch::nn::functional;

void HyperNetConfig::validate() const {
  for (std::size_t i = 0; i < 5; ++i) {
    if (channel_plan[i] < 1) throw ConfigError("hypernet channel counts must be positive");
    if (i > 0 && channel_plan[i] < channel_plan[i - 1]) {
      throw ConfigError("hypernet channel plan must be non-decreasing over the conv stack");
    }
  }
  if (channel_plan[5] != 1) throw ConfigError("hypernet projection must emit exactly 1 channel");
}

torch::Tensor gaussian_anchor(torch::Dtype dtype) {
  auto taps = torch::tensor({1.0, 4.0, 6.0, 4.0, 1.0}, torch::kFloat64) / 16.0;
  return torch::outer(taps, taps).to(dtype);
}

HyperNetImpl::HyperNetImpl(HyperNetConfig config) : config_(config) {
  config_.validate();
  const auto& ch = config_.channel_plan;
  conv1_ = register_module("conv1", nn::Conv2d(nn::Conv2dOptions(3, ch[0], {3, 1}).padding({1, 0})));
  conv2_ = register_module("conv2", nn::Conv2d(nn::Conv2dOptions(ch[0], ch[1], {1, 3}).padding({0, 1})));
  conv3_ = register_module("conv3", nn::Conv2d(nn::Conv2dOptions(ch[1], ch[2], {3, 1}).padding({1, 0})));
  conv4_ = register_module("conv4", nn::Conv2d(nn::Conv2dOptions(ch[2], ch[3], {1, 3}).padding({0, 1})));
  conv5_ = register_module("conv5", nn::Conv2d(nn::Conv2dOptions(ch[3], ch[4], 3).padding(1)));
  head_ = register_module("head", nn::Conv2d(nn::Conv2dOptions(ch[4], ch[5], 1)));

  // Start near a smoothing kernel: every entry ~ the anchor mean (1/25).
  torch::NoGradGuard no_grad;
  head_->weight.mul_(1e-2);
  head_->bias.fill_(gaussian_anchor(torch::kFloat64).mean().item<double>());
}

torch::Tensor HyperNetImpl::forward(const torch::Tensor& image) {
  const bool single = image.dim() == 3;
  auto x = single ? image.unsqueeze(0) : image;
  if (x.dim() != 4 || x.size(1) != 3) {
    throw DimensionError("hypernet expects (N,3,H,W) or (3,H,W) input");
  }
  if (x.size(2) < kMinInputSize || x.size(3) < kMinInputSize) {
    throw DimensionError("hypernet needs at least 32x32 input, got " + std::to_string(x.size(2)) +
                         "x" + std::to_string(x.size(3)));
  }
  x = F::max_pool2d(torch::relu(conv1_(x)), F::MaxPool2dFuncOptions(2));
  x = F::max_pool2d(torch::relu(conv2_(x)), F::MaxPool2dFuncOptions(2));
  x = F::max_pool2d(torch::relu(conv3_(x)), F::MaxPool2dFuncOptions(2));
  x = F::max_pool2d(torch::relu(conv4_(x)), F::MaxPool2dFuncOptions(2));
  x = F::max_pool2d(conv5_(x), F::MaxPool2dFuncOptions(2));
  x = F::adaptive_avg_pool2d(
      x, F::AdaptiveAvgPool2dFuncOptions({pyramid::kKernelSize, pyramid::kKernelSize}));
  auto kernel = head_(x).squeeze(1);
  return single ? kernel.squeeze(0) : kernel;
}

torch::Tensor predict_kernel(HyperNet& net, const torch::Tensor& image) {
  return net->forward(image);
}

}  // namespace hipyr::hypernet
