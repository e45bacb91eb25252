#pragma once

#include <array>
#include <string>
#include <string_view>

#include <torch/torch.h>

namespace hipyr::losses {

enum class GanType { kVanilla, kLsgan, kWgan, kWganSoftplus, kHinge };

inline constexpr std::array<GanType, 5> kAllGanTypes{GanType::kVanilla, GanType::kLsgan,
                                                     GanType::kWgan, GanType::kWganSoftplus,
                                                     GanType::kHinge};

/// Config spelling: vanilla, lsgan, wgan, wgan_softplus, hinge.
std::string_view to_string(GanType type);
/// Throws ConfigError for unknown names.
GanType parse_gan_type(std::string_view name);
/// Row label used in ablation tables.
std::string_view display_name(GanType type);

struct LossWeights {
  double eta_pix = 1000.0;
  double lambda_ker = 0.01;

  void validate() const;
};

struct LossBundle {
  double l_pix = 0.0;
  double l_ker = 0.0;
  double l_gan = 0.0;
  double l_total = 0.0;
};

/// l_gan + eta_pix * l_pix + lambda_ker * l_ker, for doubles and tensors alike.
template <typename T>
T weighted_total(const T& l_gan, const T& l_pix, const T& l_ker, const LossWeights& w) {
  return l_gan + l_pix * w.eta_pix + l_ker * w.lambda_ker;
}

/// Mean squared error over every element. Shapes must match exactly.
torch::Tensor pixel_loss(const torch::Tensor& output, const torch::Tensor& reference);

/// Mean squared error between (5,5) or (N,5,5) kernels and a (5,5) anchor.
torch::Tensor kernel_loss(const torch::Tensor& predicted, const torch::Tensor& anchor);

/// Generator adversarial term on raw (unsquashed) discriminator scores.
///   vanilla, wgan_softplus: mean(softplus(-d))
///   lsgan:                  mean((d - 1)^2)
///   wgan, hinge:            -mean(d)
torch::Tensor gan_generator_loss(const torch::Tensor& d_fake, GanType type);

/// Discriminator counterpart of each variant.
///   vanilla, wgan_softplus: mean(softplus(-d_real)) + mean(softplus(d_fake))
///   lsgan:                  mean((d_real - 1)^2) + mean(d_fake^2)
///   wgan:                   mean(d_fake) - mean(d_real)
///   hinge:                  mean(relu(1 - d_real)) + mean(relu(1 + d_fake))
torch::Tensor gan_discriminator_loss(const torch::Tensor& d_real, const torch::Tensor& d_fake,
                                     GanType type);

/// Builds the bundle with l_total from weighted_total. Throws NumericError if
/// any component is non-finite.
LossBundle total_generator_loss(double l_gan, double l_pix, double l_ker,
                                const LossWeights& weights);

}  // namespace hipyr::losses
