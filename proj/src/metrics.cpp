#include "hipyr/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "hipyr/errors.hpp"

namespace hipyr::metrics {

namespace F = torch::nn::functional;

namespace {

torch::Tensor as_chw(const torch::Tensor& t) {
  if (t.dim() == 4 && t.size(0) == 1) return t.squeeze(0);
  if (t.dim() == 3) return t;
  throw DimensionError("metrics expect a (C,H,W) or (1,C,H,W) image");
}

torch::Tensor gaussian_window() {
  auto coords = torch::arange(kSsimWindow, torch::kFloat64) - (kSsimWindow - 1) / 2.0;
  auto g = torch::exp(-coords.pow(2) / (2.0 * kSsimSigma * kSsimSigma));
  g = g / g.sum();
  return torch::outer(g, g).view({1, 1, kSsimWindow, kSsimWindow});
}

}  // namespace

double psnr(const torch::Tensor& a, const torch::Tensor& b, double max_val) {
  if (!a.sizes().equals(b.sizes())) throw DimensionError("psnr: image shapes differ");
  const double mse =
      (a.detach().to(torch::kFloat64) - b.detach().to(torch::kFloat64)).pow(2).mean().item<double>();
  if (mse == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(max_val * max_val / mse));
}

double ssim(const torch::Tensor& a, const torch::Tensor& b) {
  if (!a.sizes().equals(b.sizes())) throw DimensionError("ssim: image shapes differ");
  auto x = as_chw(a.detach()).to(torch::kFloat64).unsqueeze(1);  // (C,1,H,W)
  auto y = as_chw(b.detach()).to(torch::kFloat64).unsqueeze(1);
  if (x.size(2) < kSsimWindow || x.size(3) < kSsimWindow) {
    throw DimensionError("ssim needs images of at least 11x11");
  }
  const auto window = gaussian_window();
  auto filt = [&](const torch::Tensor& t) { return F::conv2d(t, window); };
  const double c1 = (kSsimK1 * 1.0) * (kSsimK1 * 1.0);
  const double c2 = (kSsimK2 * 1.0) * (kSsimK2 * 1.0);

  auto mu_x = filt(x);
  auto mu_y = filt(y);
  auto mu_xx = mu_x * mu_x;
  auto mu_yy = mu_y * mu_y;
  auto mu_xy = mu_x * mu_y;
  auto var_x = filt(x * x) - mu_xx;
  auto var_y = filt(y * y) - mu_yy;
  auto cov = filt(x * y) - mu_xy;
  auto map = ((2.0 * mu_xy + c1) * (2.0 * cov + c2)) / ((mu_xx + mu_yy + c1) * (var_x + var_y + c2));
  return map.mean({1, 2, 3}).mean().item<double>();
}

void finalize(MetricReport& report) {
  if (report.per_image.empty()) {
    report.psnr_db.reset();
    report.ssim.reset();
    return;
  }
  double p = 0.0, s = 0.0;
  for (const auto& m : report.per_image) {
    p += m.psnr_db;
    s += m.ssim;
  }
  const double n = static_cast<double>(report.per_image.size());
  report.psnr_db = p / n;
  report.ssim = s / n;
}

}  // namespace hipyr::metrics
