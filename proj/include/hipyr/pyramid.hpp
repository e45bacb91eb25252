#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <torch/torch.h>

namespace hipyr::pyramid {

inline constexpr int64_t kKernelSize = 5;
inline constexpr int kDefaultLevels = 3;
inline constexpr int kMinLevels = 2;
inline constexpr int kMaxLevels = 5;

using Size2 = std::array<int64_t, 2>;  // (height, width)

/// Kernel-parameterized Laplacian pyramid.
///
/// `bands` is ordered finest first: bands[0] is the full-resolution residual,
/// bands.back() is the low-pass base (not a residual). Band i has the source
/// size divided by 2^i. Bands keep the batch layout of the decomposed image.
struct Pyramid {
  std::vector<torch::Tensor> bands;
  Size2 source_size{0, 0};

  [[nodiscard]] std::size_t levels() const { return bands.size(); }
  [[nodiscard]] const torch::Tensor& base() const { return bands.back(); }
  [[nodiscard]] std::size_t residual_count() const { return bands.size() - 1; }
};

/// Spatial size of a (C,H,W) or (N,C,H,W) tensor.
Size2 spatial_size(const torch::Tensor& image);

/// Throws ShapeError unless `kernel` is (5,5) or (N,5,5), NumericError if it
/// holds NaN/Inf.
void check_kernel(const torch::Tensor& kernel);

/// Kernel-weighted stride-2 reduction.
///
/// out(y, x) = sum_{i,j} K(i, j) * in_reflect(2y + i - 2, 2x + j - 2), i.e.
/// a 5x5 cross-correlation over the reflect-padded input sampled at even
/// positions. The same kernel is applied to every channel. `image` is (C,H,W)
/// or (N,C,H,W); `kernel` is (5,5), shared by the batch, or (N,5,5), one per
/// sample. H and W must be even and at least 4.
torch::Tensor downsample(const torch::Tensor& image, const torch::Tensor& kernel);

/// Bicubic 2x enlargement (cubic convolution, A = -0.75, half-pixel centres,
/// border samples clamped). `target_size` must be exactly twice the input.
torch::Tensor upsample(const torch::Tensor& image, Size2 target_size);

/// I_{k+1} = downsample(I_k), h_k = I_k - upsample(I_{k+1}); the last band is
/// the low-pass image itself. Requires H and W divisible by 2^(levels-1) and at
/// least 2^levels.
Pyramid decompose(const torch::Tensor& image, const torch::Tensor& kernel,
                  int levels = kDefaultLevels);

/// Coarse-to-fine upsample-and-add. Output is not clamped.
torch::Tensor reconstruct(const Pyramid& pyramid);

/// Throws DimensionError unless band sizes halve exactly from source_size.
void check_pyramid(const Pyramid& pyramid);

}  // namespace hipyr::pyramid
