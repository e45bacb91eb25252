#pragma once

#include <filesystem>
#include <vector>

#include <torch/torch.h>

namespace hipyr::io {

/// Reads an 8- or 16-bit PNG/JPEG as a (3,H,W) float32 RGB tensor in [0,1].
/// Grayscale is replicated to three channels and alpha is dropped.
/// Throws IoError naming the path when the file is missing or undecodable.
torch::Tensor read_image(const std::filesystem::path& path);

/// Writes a (3,H,W) tensor clamped to [0,1] as an 8-bit RGB PNG.
void write_png8(const std::filesystem::path& path, const torch::Tensor& image);

/// Writes a (3,H,W) tensor clamped to [0,1] as a 16-bit RGB PNG.
void write_png16(const std::filesystem::path& path, const torch::Tensor& image);

bool is_image_file(const std::filesystem::path& path);

/// Image files directly inside `dir`, sorted by file name.
std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir);

}  // namespace hipyr::io
