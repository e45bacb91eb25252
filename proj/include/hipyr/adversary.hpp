#pragma once

#include <cstdint>
#include <vector>

#include <torch/torch.h>

namespace hipyr::adversary {

struct DiscriminatorConfig {
  int layers = 4;
  int64_t base_channels = 16;

  void validate() const;
};

// Patch discriminator: `layers` strided 4x4 convolutions (stride 2, pad 1)
// with leaky ReLU between them. The last stage emits one channel of raw
// scores at input / 2^layers resolution.
class DiscriminatorImpl : public torch::nn::Module {
 public:
  explicit DiscriminatorImpl(DiscriminatorConfig config = {});

  torch::Tensor forward(const torch::Tensor& image);

  const DiscriminatorConfig& config() const { return config_; }

 private:
  DiscriminatorConfig config_;
  std::vector<torch::nn::Conv2d> stages_;
};
TORCH_MODULE(Discriminator);

torch::Tensor discriminate(Discriminator& disc, const torch::Tensor& image);

/// FNV-1a over the raw bytes of every parameter, in registration order.
uint64_t parameter_checksum(const torch::nn::Module& module);

/// Toggles requires_grad on every parameter.
void set_trainable(torch::nn::Module& module, bool trainable);

}  // namespace hipyr::adversary
