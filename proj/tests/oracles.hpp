#pragma once

// Loop-based reference implementations used as test oracles. Everything here
// works on plain double buffers; torch is only used to convert in and out.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include <torch/torch.h>

namespace oracle {

struct Image {
  int64_t c = 0, h = 0, w = 0;
  std::vector<double> v;

  Image() = default;
  Image(int64_t c_, int64_t h_, int64_t w_) : c(c_), h(h_), w(w_), v(c_ * h_ * w_, 0.0) {}
  double& at(int64_t k, int64_t y, int64_t x) { return v[(k * h + y) * w + x]; }
  double at(int64_t k, int64_t y, int64_t x) const { return v[(k * h + y) * w + x]; }
};

using Kernel = std::vector<double>;  // 25 entries, row-major

inline Image from_tensor(const torch::Tensor& t) {
  auto x = t.detach().to(torch::kFloat64).contiguous();
  if (x.dim() == 4) x = x.squeeze(0);
  Image img(x.size(0), x.size(1), x.size(2));
  std::copy_n(x.data_ptr<double>(), img.v.size(), img.v.begin());
  return img;
}

inline Kernel kernel_from_tensor(const torch::Tensor& t) {
  auto x = t.detach().to(torch::kFloat64).contiguous();
  return Kernel(x.data_ptr<double>(), x.data_ptr<double>() + 25);
}

inline torch::Tensor to_tensor(const Image& img) {
  return torch::tensor(img.v, torch::kFloat64).reshape({img.c, img.h, img.w});
}

// numpy/torch "reflect": the edge sample is not repeated.
inline int64_t reflect(int64_t i, int64_t n) {
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * (n - 1) - i;
  }
  return i;
}

inline int64_t clamp_index(int64_t i, int64_t n) { return std::clamp<int64_t>(i, 0, n - 1); }

// out(y,x) = sum_{i,j} K(i,j) in(2y+i-2, 2x+j-2), reflect padding.
inline Image downsample(const Image& in, const Kernel& k) {
  Image out(in.c, in.h / 2, in.w / 2);
  for (int64_t ch = 0; ch < in.c; ++ch)
    for (int64_t y = 0; y < out.h; ++y)
      for (int64_t x = 0; x < out.w; ++x) {
        double s = 0.0;
        for (int i = 0; i < 5; ++i)
          for (int j = 0; j < 5; ++j)
            s += k[i * 5 + j] *
                 in.at(ch, reflect(2 * y + i - 2, in.h), reflect(2 * x + j - 2, in.w));
        out.at(ch, y, x) = s;
      }
  return out;
}

inline double cubic_weight(double d) {
  constexpr double a = -0.75;
  d = std::abs(d);
  if (d <= 1.0) return ((a + 2.0) * d - (a + 3.0)) * d * d + 1.0;
  if (d < 2.0) return ((a * d - 5.0 * a) * d + 8.0 * a) * d - 4.0 * a;
  return 0.0;
}

// Separable cubic convolution, half-pixel centres, clamped border taps.
inline Image upsample2(const Image& in) {
  Image out(in.c, in.h * 2, in.w * 2);
  for (int64_t ch = 0; ch < in.c; ++ch)
    for (int64_t y = 0; y < out.h; ++y)
      for (int64_t x = 0; x < out.w; ++x) {
        const double sy = (y + 0.5) / 2.0 - 0.5, sx = (x + 0.5) / 2.0 - 0.5;
        const auto y0 = static_cast<int64_t>(std::floor(sy));
        const auto x0 = static_cast<int64_t>(std::floor(sx));
        double s = 0.0;
        for (int64_t m = -1; m <= 2; ++m)
          for (int64_t n = -1; n <= 2; ++n)
            s += cubic_weight(sy - (y0 + m)) * cubic_weight(sx - (x0 + n)) *
                 in.at(ch, clamp_index(y0 + m, in.h), clamp_index(x0 + n, in.w));
        out.at(ch, y, x) = s;
      }
  return out;
}

inline Image subtract(const Image& a, const Image& b) {
  Image out(a.c, a.h, a.w);
  for (std::size_t i = 0; i < a.v.size(); ++i) out.v[i] = a.v[i] - b.v[i];
  return out;
}

// Residual bands finest first, then the low-pass base.
inline std::vector<Image> decompose(const Image& in, const Kernel& k, int levels) {
  std::vector<Image> bands;
  Image cur = in;
  for (int l = 0; l + 1 < levels; ++l) {
    Image low = downsample(cur, k);
    bands.push_back(subtract(cur, upsample2(low)));
    cur = low;
  }
  bands.push_back(cur);
  return bands;
}

inline double mse(const Image& a, const Image& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.v.size(); ++i) s += (a.v[i] - b.v[i]) * (a.v[i] - b.v[i]);
  return s / static_cast<double>(a.v.size());
}

inline double psnr(const Image& a, const Image& b, double max_val = 1.0) {
  const double e = mse(a, b);
  if (e == 0.0) return 100.0;
  return std::min(100.0, 10.0 * std::log10(max_val * max_val / e));
}

// Gaussian-window SSIM over valid positions, channel maps averaged.
inline double ssim(const Image& a, const Image& b) {
  constexpr int win = 11;
  constexpr double sigma = 1.5, c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
  std::vector<double> g(win);
  double gs = 0.0;
  for (int i = 0; i < win; ++i) {
    g[i] = std::exp(-((i - 5.0) * (i - 5.0)) / (2.0 * sigma * sigma));
    gs += g[i];
  }
  for (auto& x : g) x /= gs;
  double total = 0.0;
  for (int64_t ch = 0; ch < a.c; ++ch) {
    double acc = 0.0;
    int64_t count = 0;
    for (int64_t y = 0; y + win <= a.h; ++y)
      for (int64_t x = 0; x + win <= a.w; ++x) {
        double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
        for (int i = 0; i < win; ++i)
          for (int j = 0; j < win; ++j) {
            const double wt = g[i] * g[j];
            const double pa = a.at(ch, y + i, x + j), pb = b.at(ch, y + i, x + j);
            ma += wt * pa;
            mb += wt * pb;
            saa += wt * pa * pa;
            sbb += wt * pb * pb;
            sab += wt * pa * pb;
          }
        const double va = saa - ma * ma, vb = sbb - mb * mb, cov = sab - ma * mb;
        acc += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
        ++count;
      }
    total += acc / static_cast<double>(count);
  }
  return total / static_cast<double>(a.c);
}

inline double max_abs_diff(const torch::Tensor& a, const torch::Tensor& b) {
  return (a.to(torch::kFloat64) - b.to(torch::kFloat64)).abs().max().item<double>();
}

// Central difference of a scalar function of one tensor entry.
template <typename F>
double central_difference(torch::Tensor& param, int64_t flat_index, double eps, F&& f) {
  auto flat = param.view({-1});
  const double orig = flat[flat_index].item<double>();
  double up, down;
  {
    torch::NoGradGuard g;
    flat[flat_index].fill_(orig + eps);
    up = f();
    flat[flat_index].fill_(orig - eps);
    down = f();
    flat[flat_index].fill_(orig);
  }
  return (up - down) / (2.0 * eps);
}

inline double relative_error(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-10});
  return std::abs(analytic - numeric) / scale;
}

}  // namespace oracle
