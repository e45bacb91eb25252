#include "hipyr/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <string>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "hipyr/errors.hpp"

namespace hipyr::io {

namespace fs = std::filesystem;

namespace {

torch::Tensor to_hwc_u8_or_u16(const torch::Tensor& image, bool sixteen_bit) {
  if (image.dim() != 3 || image.size(0) != 3) {
    throw DimensionError("expected a (3,H,W) image for export");
  }
  const double scale = sixteen_bit ? 65535.0 : 255.0;
  auto hwc = image.detach()
                 .to(torch::kCPU, torch::kFloat64)
                 .clamp(0.0, 1.0)
                 .mul(scale)
                 .round()
                 .flip({0})  // RGB -> BGR
                 .permute({1, 2, 0})
                 .contiguous();
  return hwc.to(sixteen_bit ? torch::kInt32 : torch::kUInt8);
}

void write_png(const fs::path& path, const torch::Tensor& image, bool sixteen_bit) {
  auto hwc = to_hwc_u8_or_u16(image, sixteen_bit);
  const int h = static_cast<int>(hwc.size(0));
  const int w = static_cast<int>(hwc.size(1));
  cv::Mat mat;
  if (sixteen_bit) {
    // No uint16 dtype in torch; narrow through int32.
    cv::Mat wide(h, w, CV_32SC3, hwc.data_ptr<int32_t>());
    wide.convertTo(mat, CV_16UC3);
  } else {
    mat = cv::Mat(h, w, CV_8UC3, hwc.data_ptr<uint8_t>()).clone();
  }
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  if (!cv::imwrite(path.string(), mat)) {
    throw IoError("cannot write image: " + path.string());
  }
}

}  // namespace

torch::Tensor read_image(const fs::path& path) {
  if (!fs::exists(path)) throw IoError("no such file: " + path.string());
  cv::Mat mat = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  if (mat.empty()) throw IoError("cannot decode image: " + path.string());

  double scale = 1.0;
  switch (mat.depth()) {
    case CV_8U: scale = 1.0 / 255.0; break;
    case CV_16U: scale = 1.0 / 65535.0; break;
    default: throw IoError("unsupported pixel depth in " + path.string());
  }
  cv::Mat bgr;
  switch (mat.channels()) {
    case 1: cv::cvtColor(mat, bgr, cv::COLOR_GRAY2BGR); break;
    case 3: bgr = mat; break;
    case 4: cv::cvtColor(mat, bgr, cv::COLOR_BGRA2BGR); break;
    default: throw IoError("unsupported channel count in " + path.string());
  }
  cv::Mat as_float;
  bgr.convertTo(as_float, CV_32FC3, scale);
  auto hwc = torch::from_blob(as_float.data, {as_float.rows, as_float.cols, 3}, torch::kFloat32);
  return hwc.permute({2, 0, 1}).flip({0}).contiguous().clone();
}

void write_png8(const fs::path& path, const torch::Tensor& image) {
  write_png(path, image, false);
}

void write_png16(const fs::path& path, const torch::Tensor& image) {
  write_png(path, image, true);
}

bool is_image_file(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

std::vector<fs::path> list_images(const fs::path& dir) {
  std::vector<fs::path> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && is_image_file(entry.path())) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace hipyr::io
