#pragma once

#include <array>
#include <cstdint>

#include <torch/torch.h>

namespace hipyr::hypernet {

inline constexpr int64_t kMinInputSize = 32;

/// Output channels of the six convolution stages. The first five feed the
/// irregular/3x3 stack; the sixth is the final 1x1 projection and must be 1.
struct HyperNetConfig {
  std::array<int64_t, 6> channel_plan{8, 16, 32, 64, 64, 1};

  void validate() const;
};

/// The fixed 5x5 binomial Gaussian: outer((1,4,6,4,1)/16, (1,4,6,4,1)/16).
torch::Tensor gaussian_anchor(torch::Dtype dtype = torch::kFloat32);

/// Image -> personalized 5x5 decomposition kernel.
///
///   conv 3x1 -> ReLU -> maxpool2
///   conv 1x3 -> ReLU -> maxpool2
///   conv 3x1 -> ReLU -> maxpool2
///   conv 1x3 -> ReLU -> maxpool2
///   conv 3x3 -> maxpool2
///   adaptive average pool to 5x5 -> conv 1x1 to one channel
///
/// Irregular convs pad along their long axis only, so spatial size changes
/// only at the pools. The adaptive pool makes the 5x5 output independent of
/// the input size. There is no output activation; kernel entries may be
/// negative.
class HyperNetImpl : public torch::nn::Module {
 public:
  explicit HyperNetImpl(HyperNetConfig config = {});

  /// (N,3,H,W) -> (N,5,5); a (3,H,W) input gives (5,5). H, W >= 32.
  torch::Tensor forward(const torch::Tensor& image);

  const HyperNetConfig& config() const { return config_; }

  /// The 1x1 projection that emits the kernel (exposed for initialization
  /// and tests).
  torch::nn::Conv2d& head() { return head_; }

 private:
  HyperNetConfig config_;
  torch::nn::Conv2d conv1_{nullptr}, conv2_{nullptr}, conv3_{nullptr}, conv4_{nullptr},
      conv5_{nullptr}, head_{nullptr};
};
TORCH_MODULE(HyperNet);

/// Convenience wrapper around HyperNet::forward for a single image.
torch::Tensor predict_kernel(HyperNet& net, const torch::Tensor& image);

}  // namespace hipyr::hypernet
