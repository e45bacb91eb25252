#include "hipyr/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <iterator>

#include "hipyr/errors.hpp"

namespace hipyr::training {

using nlohmann::json;

namespace {

std::string dtype_name(torch::Dtype dtype) {
  switch (dtype) {
    case torch::kFloat32: return "float32";
    case torch::kFloat64: return "float64";
    case torch::kInt64: return "int64";
    default: throw IoError("checkpoint: unsupported tensor dtype");
  }
}

torch::Dtype parse_dtype(const std::string& name) {
  if (name == "float32") return torch::kFloat32;
  if (name == "float64") return torch::kFloat64;
  if (name == "int64") return torch::kInt64;
  throw IoError("checkpoint: unknown dtype '" + name + "'");
}

void put_u64(std::vector<uint8_t>& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

uint64_t get_u64(const uint8_t* p) {
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(p[i]) << (8 * i);
  return v;
}

}  // namespace

const torch::Tensor& CheckpointData::blob(const std::string& name) const {
  for (const auto& [n, t] : blobs) {
    if (n == name) return t;
  }
  throw IoError("checkpoint has no blob named '" + name + "'");
}

bool CheckpointData::has_blob(const std::string& name) const {
  for (const auto& [n, t] : blobs) {
    if (n == name) return true;
  }
  return false;
}

std::vector<uint8_t> encode_checkpoint(const CheckpointData& data) {
  json blobs = json::array();
  std::vector<torch::Tensor> payload;
  uint64_t offset = 0;
  for (const auto& [name, tensor] : data.blobs) {
    auto t = tensor.detach().to(torch::kCPU).contiguous();
    const uint64_t nbytes = static_cast<uint64_t>(t.numel()) * t.element_size();
    blobs.push_back({{"name", name},
                     {"dtype", dtype_name(t.scalar_type())},
                     {"shape", t.sizes().vec()},
                     {"offset", offset},
                     {"nbytes", nbytes}});
    offset += nbytes;
    payload.push_back(std::move(t));
  }
  const json manifest{{"format", 1}, {"meta", data.meta}, {"blobs", blobs}};
  const std::string text = manifest.dump();

  std::vector<uint8_t> out(std::begin(kCheckpointMagic), std::end(kCheckpointMagic));
  put_u64(out, text.size());
  out.insert(out.end(), text.begin(), text.end());
  out.reserve(out.size() + offset);
  for (const auto& t : payload) {
    const auto* p = static_cast<const uint8_t*>(t.data_ptr());
    out.insert(out.end(), p, p + t.numel() * t.element_size());
  }
  return out;
}

CheckpointData decode_checkpoint(std::span<const uint8_t> bytes) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kCheckpointMagic, 8) != 0) {
    throw IoError("not a hipyr checkpoint (bad magic)");
  }
  const uint64_t mlen = get_u64(bytes.data() + 8);
  if (16 + mlen > bytes.size()) throw IoError("truncated checkpoint manifest");
  json manifest;
  try {
    manifest = json::parse(bytes.begin() + 16, bytes.begin() + 16 + static_cast<std::ptrdiff_t>(mlen));
  } catch (const json::exception& e) {
    throw IoError(std::string("corrupt checkpoint manifest: ") + e.what());
  }
  if (manifest.value("format", 0) != 1) throw IoError("unsupported checkpoint format");
  const auto payload = bytes.subspan(16 + mlen);

  CheckpointData data;
  data.meta = manifest.at("meta");
  for (const auto& b : manifest.at("blobs")) {
    const auto offset = b.at("offset").get<uint64_t>();
    const auto nbytes = b.at("nbytes").get<uint64_t>();
    if (offset + nbytes > payload.size()) throw IoError("truncated checkpoint payload");
    auto shape = b.at("shape").get<std::vector<int64_t>>();
    auto t = torch::empty(shape, torch::TensorOptions().dtype(parse_dtype(b.at("dtype"))));
    if (static_cast<uint64_t>(t.numel()) * t.element_size() != nbytes) {
      throw IoError("checkpoint blob size mismatch for " + b.at("name").get<std::string>());
    }
    std::memcpy(t.data_ptr(), payload.data() + offset, nbytes);
    data.blobs.emplace_back(b.at("name").get<std::string>(), std::move(t));
  }
  return data;
}

void write_checkpoint(const std::filesystem::path& path, const CheckpointData& data) {
  const auto bytes = encode_checkpoint(data);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

CheckpointData read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path.string());
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace hipyr::training
