#include "hipyr/losses.hpp"

#include <cmath>

#include "hipyr/errors.hpp"
#include "hipyr/pyramid.hpp"

namespace hipyr::losses {

namespace F = torch::nn::functional;

std::string_view to_string(GanType type) {
  switch (type) {
    case GanType::kVanilla: return "vanilla";
    case GanType::kLsgan: return "lsgan";
    case GanType::kWgan: return "wgan";
    case GanType::kWganSoftplus: return "wgan_softplus";
    case GanType::kHinge: return "hinge";
  }
  throw ConfigError("unknown gan type");
}

std::string_view display_name(GanType type) {
  switch (type) {
    case GanType::kVanilla: return "Vanilla";
    case GanType::kLsgan: return "LS-GAN";
    case GanType::kWgan: return "W-GAN";
    case GanType::kWganSoftplus: return "W-GAN Softplus";
    case GanType::kHinge: return "Hinge";
  }
  throw ConfigError("unknown gan type");
}

GanType parse_gan_type(std::string_view name) {
  for (auto type : kAllGanTypes) {
    if (to_string(type) == name) return type;
  }
  throw ConfigError("unknown gan_type '" + std::string(name) +
                    "' (expected vanilla, lsgan, wgan, wgan_softplus or hinge)");
}

void LossWeights::validate() const {
  if (!std::isfinite(eta_pix) || eta_pix < 0.0) throw ConfigError("eta_pix must be finite and >= 0");
  if (!std::isfinite(lambda_ker) || lambda_ker < 0.0) {
    throw ConfigError("lambda_ker must be finite and >= 0");
  }
}

torch::Tensor pixel_loss(const torch::Tensor& output, const torch::Tensor& reference) {
  if (!output.sizes().equals(reference.sizes())) {
    throw DimensionError("pixel_loss: output and reference shapes differ");
  }
  return F::mse_loss(output, reference);
}

torch::Tensor kernel_loss(const torch::Tensor& predicted, const torch::Tensor& anchor) {
  pyramid::check_kernel(predicted);
  if (anchor.dim() != 2 || anchor.size(0) != pyramid::kKernelSize ||
      anchor.size(1) != pyramid::kKernelSize) {
    throw DimensionError("kernel_loss: anchor must be 5x5");
  }
  return (predicted - anchor.to(predicted.dtype())).pow(2).mean();
}

torch::Tensor gan_generator_loss(const torch::Tensor& d_fake, GanType type) {
  switch (type) {
    case GanType::kVanilla:
    case GanType::kWganSoftplus: return F::softplus(-d_fake).mean();
    case GanType::kLsgan: return (d_fake - 1.0).pow(2).mean();
    case GanType::kWgan:
    case GanType::kHinge: return -d_fake.mean();
  }
  throw ConfigError("unknown gan type");
}

torch::Tensor gan_discriminator_loss(const torch::Tensor& d_real, const torch::Tensor& d_fake,
                                     GanType type) {
  switch (type) {
    case GanType::kVanilla:
    case GanType::kWganSoftplus:
      return F::softplus(-d_real).mean() + F::softplus(d_fake).mean();
    case GanType::kLsgan: return (d_real - 1.0).pow(2).mean() + d_fake.pow(2).mean();
    case GanType::kWgan: return d_fake.mean() - d_real.mean();
    case GanType::kHinge:
      return torch::relu(1.0 - d_real).mean() + torch::relu(1.0 + d_fake).mean();
  }
  throw ConfigError("unknown gan type");
}

LossBundle total_generator_loss(double l_gan, double l_pix, double l_ker,
                                const LossWeights& weights) {
  if (!std::isfinite(l_gan) || !std::isfinite(l_pix) || !std::isfinite(l_ker)) {
    throw NumericError("non-finite generator loss component");
  }
  LossBundle b;
  b.l_gan = l_gan;
  b.l_pix = l_pix;
  b.l_ker = l_ker;
  b.l_total = weighted_total(l_gan, l_pix, l_ker, weights);
  return b;
}

}  // namespace hipyr::losses
