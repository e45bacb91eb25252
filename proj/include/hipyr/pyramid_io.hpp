#pragma once

#include <filesystem>
#include <iosfwd>

#include <torch/torch.h>

#include "hipyr/pyramid.hpp"

namespace hipyr::pyramid {

// Kernel text format: 5 lines of 5 whitespace-separated decimal numbers.
torch::Tensor parse_kernel(std::istream& in);
torch::Tensor read_kernel(const std::filesystem::path& path);
void format_kernel(std::ostream& out, const torch::Tensor& kernel);
void write_kernel(const std::filesystem::path& path, const torch::Tensor& kernel);

inline constexpr double kResidualOffset = 0.5;
inline constexpr const char* kSidecarName = "pyramid.txt";

/// Per-band record of the sidecar file.
struct BandRecord {
  std::size_t index = 0;
  bool residual = true;
  std::string file;
  int64_t height = 0;
  int64_t width = 0;
  double offset = 0.0;
  double min_value = 0.0;
  double max_value = 0.0;
  int64_t clipped = 0;  // samples outside [0,1] after the offset
};

/// Writes every band of a single-image pyramid as a 16-bit PNG
/// (band_<i>.png; residuals shifted by +0.5 and clamped) and a sidecar
/// `pyramid.txt` with sizes, offsets, exact float ranges and clip counts.
std::vector<BandRecord> export_pyramid(const std::filesystem::path& dir, const Pyramid& pyramid);

/// Reads back a directory written by export_pyramid. Values are exact up to
/// 16-bit quantization unless the sidecar reports clipped samples.
Pyramid import_pyramid(const std::filesystem::path& dir);

}  // namespace hipyr::pyramid
