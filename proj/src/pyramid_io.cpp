#include "hipyr/pyramid_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "hipyr/errors.hpp"
#include "hipyr/image_io.hpp"

namespace hipyr::pyramid {

namespace fs = std::filesystem;

namespace {

std::string exact(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

torch::Tensor parse_kernel(std::istream& in) {
  std::vector<float> values;
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string token;
    int cols = 0;
    while (ls >> token) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(token, &used);
      } catch (const std::exception&) {
        throw ParameterError("kernel file: cannot parse '" + token + "'");
      }
      if (used != token.size()) throw ParameterError("kernel file: cannot parse '" + token + "'");
      values.push_back(static_cast<float>(v));
      ++cols;
    }
    if (cols == 0) continue;
    if (cols != kKernelSize) {
      throw ShapeError("kernel file: row " + std::to_string(rows + 1) + " has " +
                       std::to_string(cols) + " entries, expected 5");
    }
    ++rows;
  }
  if (rows != kKernelSize) {
    throw ShapeError("kernel file: expected 5 rows, found " + std::to_string(rows));
  }
  auto kernel = torch::from_blob(values.data(), {kKernelSize, kKernelSize}, torch::kFloat32).clone();
  check_kernel(kernel);
  return kernel;
}

torch::Tensor read_kernel(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open kernel file: " + path.string());
  return parse_kernel(in);
}

void format_kernel(std::ostream& out, const torch::Tensor& kernel) {
  check_kernel(kernel);
  if (kernel.dim() != 2) throw ShapeError("format_kernel expects a single (5,5) kernel");
  auto k = kernel.detach().to(torch::kCPU, torch::kFloat32).contiguous();
  const float* p = k.data_ptr<float>();
  for (int64_t r = 0; r < kKernelSize; ++r) {
    for (int64_t c = 0; c < kKernelSize; ++c) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(p[r * kKernelSize + c]));
      out << (c ? " " : "") << buf;
    }
    out << '\n';
  }
}

void write_kernel(const fs::path& path, const torch::Tensor& kernel) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write kernel file: " + path.string());
  format_kernel(out, kernel);
}

std::vector<BandRecord> export_pyramid(const fs::path& dir, const Pyramid& pyramid) {
  check_pyramid(pyramid);
  fs::create_directories(dir);
  std::vector<BandRecord> records;
  for (std::size_t i = 0; i < pyramid.levels(); ++i) {
    auto band = pyramid.bands[i].detach().to(torch::kCPU, torch::kFloat64);
    if (band.dim() == 4) {
      if (band.size(0) != 1) throw DimensionError("export_pyramid expects a single image");
      band = band.squeeze(0);
    }
    BandRecord rec;
    rec.index = i;
    rec.residual = i + 1 < pyramid.levels();
    rec.file = "band_" + std::to_string(i) + ".png";
    rec.height = band.size(1);
    rec.width = band.size(2);
    rec.offset = rec.residual ? kResidualOffset : 0.0;
    rec.min_value = band.min().item<double>();
    rec.max_value = band.max().item<double>();
    auto shifted = band + rec.offset;
    rec.clipped = ((shifted < 0.0) | (shifted > 1.0)).sum().item<int64_t>();
    io::write_png16(dir / rec.file, shifted);
    records.push_back(rec);
  }

  std::ofstream side(dir / kSidecarName);
  if (!side) throw IoError("cannot write sidecar in " + dir.string());
  side << "# band index kind file height width offset min max clipped\n";
  side << "source " << pyramid.source_size[0] << ' ' << pyramid.source_size[1] << '\n';
  for (const auto& r : records) {
    side << "band " << r.index << ' ' << (r.residual ? "residual" : "base") << ' ' << r.file << ' '
         << r.height << ' ' << r.width << ' ' << exact(r.offset) << ' ' << exact(r.min_value)
         << ' ' << exact(r.max_value) << ' ' << r.clipped << '\n';
  }
  return records;
}

Pyramid import_pyramid(const fs::path& dir) {
  std::ifstream side(dir / kSidecarName);
  if (!side) throw IoError("missing sidecar: " + (dir / kSidecarName).string());
  Pyramid pyr;
  std::string line;
  while (std::getline(side, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "source") {
      ls >> pyr.source_size[0] >> pyr.source_size[1];
    } else if (tag == "band") {
      BandRecord r;
      std::string kind;
      ls >> r.index >> kind >> r.file >> r.height >> r.width >> r.offset >> r.min_value >>
          r.max_value >> r.clipped;
      if (!ls) throw IoError("malformed sidecar line: " + line);
      if (r.index != pyr.bands.size()) throw IoError("sidecar bands out of order");
      auto img = io::read_image(dir / r.file).to(torch::kFloat64) - r.offset;
      if (img.size(1) != r.height || img.size(2) != r.width) {
        throw DimensionError("band image " + r.file + " does not match sidecar size");
      }
      pyr.bands.push_back(img.to(torch::kFloat32));
    }
  }
  check_pyramid(pyr);
  return pyr;
}

}  // namespace hipyr::pyramid
