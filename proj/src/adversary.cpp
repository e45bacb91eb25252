#include "hipyr/adversary.hpp"

#include <algorithm>
#include <string>

#include "hipyr/errors.hpp"

namespace hipyr::adversary {

namespace nn = torch::nn;
namespace F = torch::nn::functional;

void DiscriminatorConfig::validate() const {
  if (layers < 2) throw ConfigError("discriminator needs at least 2 stages");
  if (base_channels < 1) throw ConfigError("discriminator base_channels must be >= 1");
}

DiscriminatorImpl::DiscriminatorImpl(DiscriminatorConfig config) : config_(config) {
  config_.validate();
  int64_t in = 3;
  for (int i = 0; i < config_.layers; ++i) {
    const bool last = i + 1 == config_.layers;
    const int64_t out =
        last ? 1 : std::min(config_.base_channels << i, config_.base_channels * 8);
    stages_.push_back(register_module(
        "stage" + std::to_string(i),
        nn::Conv2d(nn::Conv2dOptions(in, out, 4).stride(2).padding(1))));
    in = out;
  }
}

torch::Tensor DiscriminatorImpl::forward(const torch::Tensor& image) {
  auto x = image.dim() == 3 ? image.unsqueeze(0) : image;
  if (x.dim() != 4 || x.size(1) != 3) throw DimensionError("discriminator expects 3-channel images");
  const int64_t factor = int64_t{1} << config_.layers;
  if (x.size(2) % factor != 0 || x.size(3) % factor != 0) {
    throw DimensionError("image " + std::to_string(x.size(2)) + "x" + std::to_string(x.size(3)) +
                         " is too small or not divisible for " + std::to_string(config_.layers) +
                         " discriminator stages");
  }
  for (std::size_t i = 0; i < stages_.size(); ++i) {
    x = stages_[i](x);
    if (i + 1 < stages_.size()) {
      x = F::leaky_relu(x, F::LeakyReLUFuncOptions().negative_slope(0.2));
    }
  }
  return x;
}

torch::Tensor discriminate(Discriminator& disc, const torch::Tensor& image) {
  return disc->forward(image);
}

uint64_t parameter_checksum(const torch::nn::Module& module) {
  uint64_t hash = 1469598103934665603ULL;
  for (const auto& p : module.parameters()) {
    auto t = p.detach().to(torch::kCPU).contiguous();
    const auto* bytes = static_cast<const unsigned char*>(t.data_ptr());
    const std::size_t n = static_cast<std::size_t>(t.numel()) * t.element_size();
    for (std::size_t i = 0; i < n; ++i) {
      hash ^= bytes[i];
      hash *= 1099511628211ULL;
    }
  }
  return hash;
}

void set_trainable(torch::nn::Module& module, bool trainable) {
  for (auto& p : module.parameters()) p.set_requires_grad(trainable);
}

}  // namespace hipyr::adversary
