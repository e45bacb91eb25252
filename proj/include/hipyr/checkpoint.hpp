#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "json.hpp"

namespace hipyr::training {

/// Single-file container of named tensors plus a JSON metadata object.
///
/// Layout (all integers little-endian):
///   bytes 0-7   magic "HIPYRCK1"
///   bytes 8-15  uint64 manifest length M
///   next M      UTF-8 JSON manifest:
///                 {"format": 1, "meta": {...},
///                  "blobs": [{"name", "dtype", "shape", "offset", "nbytes"}, ...]}
///   remainder   blob payload; each blob is the raw contiguous tensor bytes at
///               `offset` from the start of the payload
///
/// dtype is one of "float32", "float64", "int64". Blobs are written in the
/// order given, so encoding the same contents twice yields identical bytes.
struct CheckpointData {
  nlohmann::json meta = nlohmann::json::object();
  std::vector<std::pair<std::string, torch::Tensor>> blobs;

  const torch::Tensor& blob(const std::string& name) const;
  bool has_blob(const std::string& name) const;
};

inline constexpr char kCheckpointMagic[8] = {'H', 'I', 'P', 'Y', 'R', 'C', 'K', '1'};

std::vector<uint8_t> encode_checkpoint(const CheckpointData& data);
CheckpointData decode_checkpoint(std::span<const uint8_t> bytes);

void write_checkpoint(const std::filesystem::path& path, const CheckpointData& data);
CheckpointData read_checkpoint(const std::filesystem::path& path);

}  // namespace hipyr::training
