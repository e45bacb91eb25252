#pragma once

#include <optional>
#include <string>
#include <vector>

#include <torch/torch.h>

namespace hipyr::metrics {

/// Returned when the two images are identical (MSE == 0); also the upper
/// bound of every reported PSNR.
inline constexpr double kPsnrCap = 100.0;

inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;
inline constexpr double kSsimK1 = 0.01;
inline constexpr double kSsimK2 = 0.03;

/// 10 log10(max_val^2 / MSE), capped at kPsnrCap. Computed in double.
double psnr(const torch::Tensor& a, const torch::Tensor& b, double max_val = 1.0);

/// Single-scale SSIM with an 11x11 Gaussian window (sigma 1.5), K1 = 0.01,
/// K2 = 0.03, dynamic range 1. Statistics are taken over "valid" window
/// positions only; the SSIM map is averaged per channel and the channel means
/// are averaged. Inputs are (C,H,W) or (1,C,H,W) with H, W >= 11.
double ssim(const torch::Tensor& a, const torch::Tensor& b);

struct ImageMetric {
  std::string id;
  double psnr_db = 0.0;
  double ssim = 0.0;
};

struct MetricReport {
  std::vector<ImageMetric> per_image;
  std::optional<double> psnr_db;  // absent for an empty report
  std::optional<double> ssim;
  std::vector<std::string> failures;  // "<id>: <reason>" for skipped images
};

/// Fills the aggregate fields with arithmetic means of per_image.
void finalize(MetricReport& report);

}  // namespace hipyr::metrics
