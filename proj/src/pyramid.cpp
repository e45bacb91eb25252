#include "hipyr/pyramid.hpp"

#include <string>

#include "hipyr/errors.hpp"

namespace hipyr::pyramid {

namespace F = torch::nn::functional;

namespace {

std::string size_str(const torch::Tensor& t) {
  std::string out = "(";
  for (int64_t d = 0; d < t.dim(); ++d) {
    if (d) out += ",";
    out += std::to_string(t.size(d));
  }
  return out + ")";
}

torch::Tensor as_batch(const torch::Tensor& image) {
  if (image.dim() == 3) return image.unsqueeze(0);
  if (image.dim() == 4) return image;
  throw DimensionError("image must be (C,H,W) or (N,C,H,W), got " + size_str(image));
}

torch::Tensor restore_rank(const torch::Tensor& batched, const torch::Tensor& like) {
  return like.dim() == 3 ? batched.squeeze(0) : batched;
}

}  // namespace

Size2 spatial_size(const torch::Tensor& image) {
  if (image.dim() < 2) throw DimensionError("tensor has no spatial dimensions");
  return {image.size(-2), image.size(-1)};
}

void check_kernel(const torch::Tensor& kernel) {
  const bool square5 = kernel.dim() >= 2 && kernel.size(-1) == kKernelSize &&
                       kernel.size(-2) == kKernelSize;
  if (!square5 || kernel.dim() > 3) {
    throw ShapeError("kernel must be (5,5) or (N,5,5), got " + size_str(kernel));
  }
  if (!torch::isfinite(kernel).all().item<bool>()) {
    throw NumericError("kernel contains non-finite entries");
  }
}

torch::Tensor downsample(const torch::Tensor& image, const torch::Tensor& kernel) {
  check_kernel(kernel);
  const auto x = as_batch(image);
  const int64_t n = x.size(0), c = x.size(1), h = x.size(2), w = x.size(3);
  if (h % 2 != 0 || w % 2 != 0) {
    throw DimensionError("downsample needs even height and width, got " + size_str(image));
  }
  if (h < 4 || w < 4) {
    throw DimensionError("downsample needs at least 4x4 input, got " + size_str(image));
  }
  torch::Tensor per_sample;
  if (kernel.dim() == 2) {
    per_sample = kernel.unsqueeze(0).expand({n, kKernelSize, kKernelSize});
  } else {
    if (kernel.size(0) != n) {
      throw ShapeError("per-sample kernels " + size_str(kernel) + " do not match batch of " +
                       std::to_string(n));
    }
    per_sample = kernel;
  }
  // One depthwise filter per (sample, channel) pair.
  auto weight = per_sample.to(x.dtype())
                    .unsqueeze(1)
                    .expand({n, c, kKernelSize, kKernelSize})
                    .reshape({n * c, 1, kKernelSize, kKernelSize});
  auto padded = F::pad(x.reshape({1, n * c, h, w}),
                       F::PadFuncOptions({2, 2, 2, 2}).mode(torch::kReflect));
  auto out = F::conv2d(padded, weight, F::Conv2dFuncOptions().stride(2).groups(n * c));
  return restore_rank(out.view({n, c, h / 2, w / 2}), image);
}

torch::Tensor upsample(const torch::Tensor& image, Size2 target_size) {
  const auto x = as_batch(image);
  const int64_t h = x.size(2), w = x.size(3);
  if (h < 2 || w < 2) {
    throw DimensionError("bicubic upsample needs at least 2x2 input, got " + size_str(image));
  }
  if (target_size[0] != 2 * h || target_size[1] != 2 * w) {
    throw DimensionError("upsample target (" + std::to_string(target_size[0]) + "," +
                         std::to_string(target_size[1]) + ") is not twice " + size_str(image));
  }
  auto out = F::interpolate(x, F::InterpolateFuncOptions()
                                   .size(std::vector<int64_t>{target_size[0], target_size[1]})
                                   .mode(torch::kBicubic)
                                   .align_corners(false));
  return restore_rank(out, image);
}

Pyramid decompose(const torch::Tensor& image, const torch::Tensor& kernel, int levels) {
  if (levels < kMinLevels || levels > kMaxLevels) {
    throw DimensionError("pyramid levels must be in [2,5], got " + std::to_string(levels));
  }
  const auto [h, w] = spatial_size(image);
  const int64_t factor = int64_t{1} << (levels - 1);
  if (h % factor != 0 || w % factor != 0) {
    throw DimensionError("image " + size_str(image) + " is not divisible by " +
                         std::to_string(factor) + " for " + std::to_string(levels) + " levels");
  }
  if (h < 2 * factor || w < 2 * factor) {
    throw DimensionError("image " + size_str(image) + " is too small for " +
                         std::to_string(levels) + " levels");
  }
  Pyramid pyr;
  pyr.source_size = {h, w};
  pyr.bands.reserve(levels);
  torch::Tensor current = image;
  for (int level = 0; level + 1 < levels; ++level) {
    auto low = downsample(current, kernel);
    pyr.bands.push_back(current - upsample(low, spatial_size(current)));
    current = low;
  }
  pyr.bands.push_back(current);
  return pyr;
}

void check_pyramid(const Pyramid& pyramid) {
  if (pyramid.bands.size() < 2) throw DimensionError("pyramid needs at least two bands");
  for (std::size_t i = 0; i < pyramid.bands.size(); ++i) {
    const auto [h, w] = spatial_size(pyramid.bands[i]);
    const int64_t div = int64_t{1} << i;
    if (h * div != pyramid.source_size[0] || w * div != pyramid.source_size[1]) {
      throw DimensionError("band " + std::to_string(i) + " has size " +
                           size_str(pyramid.bands[i]) + ", inconsistent with source size");
    }
  }
}

torch::Tensor reconstruct(const Pyramid& pyramid) {
  check_pyramid(pyramid);
  torch::Tensor current = pyramid.base();
  for (auto band = pyramid.bands.rbegin() + 1; band != pyramid.bands.rend(); ++band) {
    current = upsample(current, spatial_size(*band)) + *band;
  }
  return current;
}

}  // namespace hipyr::pyramid
