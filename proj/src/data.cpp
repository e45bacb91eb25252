#include "hipyr/data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "hipyr/errors.hpp"
#include "hipyr/image_io.hpp"

namespace hipyr::data {

namespace fs = std::filesystem;
namespace F = torch::nn::functional;

namespace {

bool is_numeric(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::optional<fs::path> find_label(const fs::path& labels_dir, const std::string& scene) {
  for (const char* ext : {".png", ".PNG", ".jpg", ".JPG", ".jpeg", ".JPEG"}) {
    auto p = labels_dir / (scene + ext);
    if (fs::is_regular_file(p)) return p;
  }
  return std::nullopt;
}

bool readable(const fs::path& p) {
  try {
    io::read_image(p);
    return true;
  } catch (const IoError&) {
    return false;
  }
}

std::set<std::string> read_test_index(const fs::path& path) {
  std::set<std::string> ids;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (!line.empty() && line[0] != '#') ids.insert(line);
  }
  return ids;
}

int64_t tenth(std::size_t n) { return std::llround(static_cast<double>(n) / 10.0); }

}  // namespace

std::string_view to_string(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "unknown";
}

uint64_t stable_hash(std::string_view text) {
  uint64_t hash = 1469598103934665603ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  return hash;
}

SiceSplits load_sice(const fs::path& root, const LoadOptions& options) {
  SiceSplits out;
  const fs::path scenes_dir = root / "scenes";
  const fs::path labels_dir = root / "labels";
  if (!fs::is_directory(scenes_dir)) {
    if (fs::exists(root)) return out;  // no scenes yet
    throw IngestionError("dataset root does not exist: " + root.string());
  }

  std::vector<SceneDescriptor> scenes;
  for (const auto& entry : fs::directory_iterator(scenes_dir)) {
    if (!entry.is_directory()) continue;
    SceneDescriptor scene;
    scene.id = entry.path().filename().string();
    auto label = find_label(labels_dir, scene.id);
    if (!label) throw IngestionError("scene " + scene.id + " has no reference image in labels/");
    scene.reference_path = *label;

    auto frames = io::list_images(entry.path());
    scene.indexed = std::all_of(frames.begin(), frames.end(),
                                [](const fs::path& p) { return is_numeric(p.stem().string()); });
    if (scene.indexed) {
      std::sort(frames.begin(), frames.end(), [](const fs::path& a, const fs::path& b) {
        return std::stoll(a.stem().string()) < std::stoll(b.stem().string());
      });
    }
    for (const auto& f : frames) {
      if (options.verify_images && !readable(f)) {
        out.warnings.push_back("unreadable frame skipped: " + f.string());
        out.manifest.push_back({scene.id, "skipped", {f.string()}, "unreadable frame"});
        continue;
      }
      scene.frame_paths.push_back(f);
    }
    if (options.verify_images && !readable(scene.reference_path)) {
      throw IngestionError("scene " + scene.id + " has an unreadable reference: " +
                           scene.reference_path.string());
    }
    if (scene.frame_paths.empty()) {
      out.warnings.push_back("scene " + scene.id + " has no readable frames; skipped");
      out.manifest.push_back({scene.id, "skipped", {}, "no readable frames"});
      continue;
    }
    if (scene.frame_paths.size() < 7 || scene.frame_paths.size() > 9) {
      out.warnings.push_back("scene " + scene.id + " has " +
                             std::to_string(scene.frame_paths.size()) + " frames (expected 7-9)");
    }
    scenes.push_back(std::move(scene));
  }

  std::sort(scenes.begin(), scenes.end(), [](const SceneDescriptor& a, const SceneDescriptor& b) {
    const auto ha = stable_hash(a.id), hb = stable_hash(b.id);
    return ha != hb ? ha < hb : a.id < b.id;
  });

  const std::size_t n = scenes.size();
  const fs::path index_file = root / "test_index.txt";
  if (fs::is_regular_file(index_file)) {
    const auto test_ids = read_test_index(index_file);
    std::vector<SceneDescriptor> rest;
    for (auto& s : scenes) {
      (test_ids.count(s.id) ? out.test : rest).push_back(std::move(s));
    }
    const auto n_val = static_cast<std::size_t>(std::min<int64_t>(tenth(n), rest.size()));
    const std::size_t n_train = rest.size() - n_val;
    out.train.assign(std::make_move_iterator(rest.begin()),
                     std::make_move_iterator(rest.begin() + n_train));
    out.val.assign(std::make_move_iterator(rest.begin() + n_train),
                   std::make_move_iterator(rest.end()));
  } else {
    const auto n_test = static_cast<std::size_t>(tenth(n));
    const auto n_val = static_cast<std::size_t>(tenth(n));
    const std::size_t n_train = n - n_test - n_val;
    for (std::size_t i = 0; i < n; ++i) {
      auto& dst = i < n_train ? out.train : (i < n_train + n_val ? out.val : out.test);
      dst.push_back(std::move(scenes[i]));
    }
  }

  auto record = [&](const std::vector<SceneDescriptor>& list, Split split) {
    for (const auto& s : list) {
      ManifestRecord r{s.id, std::string(to_string(split)), {}, {}};
      for (const auto& f : s.frame_paths) r.paths.push_back(f.string());
      r.paths.push_back(s.reference_path.string());
      out.manifest.push_back(std::move(r));
    }
  };
  record(out.train, Split::kTrain);
  record(out.val, Split::kVal);
  record(out.test, Split::kTest);
  for (const auto& w : out.warnings) std::cerr << "warning: " << w << '\n';
  return out;
}

void write_manifest(const fs::path& path, const std::vector<ManifestRecord>& records) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write manifest: " + path.string());
  for (const auto& r : records) {
    out << r.id << '\t' << r.split << '\t';
    for (std::size_t i = 0; i < r.paths.size(); ++i) out << (i ? "," : "") << r.paths[i];
    if (!r.note.empty()) out << '\t' << r.note;
    out << '\n';
  }
}

double mean_luminance(const torch::Tensor& image) {
  auto img = image.dim() == 4 ? image.squeeze(0) : image;
  auto luma = 0.299 * img[0] + 0.587 * img[1] + 0.114 * img[2];
  return luma.to(torch::kFloat64).mean().item<double>();
}

torch::Tensor resize_bilinear(const torch::Tensor& image, pyramid::Size2 size) {
  const auto cur = pyramid::spatial_size(image);
  if (cur == size) return image.clone();
  const bool single = image.dim() == 3;
  auto x = single ? image.unsqueeze(0) : image;
  auto out = F::interpolate(x, F::InterpolateFuncOptions()
                                   .size(std::vector<int64_t>{size[0], size[1]})
                                   .mode(torch::kBilinear)
                                   .align_corners(false));
  return single ? out.squeeze(0) : out;
}

SamplePair resize_pair(const SamplePair& pair, pyramid::Size2 size) {
  if (size[0] % 4 != 0 || size[1] % 4 != 0) {
    throw DimensionError("resize target must be divisible by 4");
  }
  if (pair.degraded.numel() == 0 || pair.reference.numel() == 0) {
    throw DimensionError("resize_pair: empty image");
  }
  return {resize_bilinear(pair.degraded, size), resize_bilinear(pair.reference, size), pair.id};
}

ExposureSequence load_sequence(const SceneDescriptor& scene, std::optional<pyramid::Size2> size) {
  ExposureSequence seq;
  seq.id = scene.id;
  for (const auto& p : scene.frame_paths) {
    auto img = io::read_image(p);
    seq.frames.push_back(size ? resize_bilinear(img, *size) : img);
  }
  if (!scene.indexed) {
    std::vector<std::pair<double, torch::Tensor>> keyed;
    for (auto& f : seq.frames) keyed.emplace_back(mean_luminance(f), f);
    std::stable_sort(keyed.begin(), keyed.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 0; i < keyed.size(); ++i) seq.frames[i] = keyed[i].second;
  }
  auto ref = io::read_image(scene.reference_path);
  seq.reference = size ? resize_bilinear(ref, *size) : ref;
  return seq;
}

std::vector<int64_t> panel_boundaries(int64_t width, int64_t panel_count) {
  if (panel_count < 1 || panel_count > width) {
    throw ParameterError("panel count must be in [1, width]");
  }
  std::vector<int64_t> b{0};
  const int64_t base = width / panel_count, extra = width % panel_count;
  for (int64_t j = 0; j < panel_count; ++j) b.push_back(b.back() + base + (j < extra ? 1 : 0));
  return b;
}

std::vector<std::size_t> grad_ranks(std::size_t frame_count, int64_t panel_count) {
  if (panel_count < 2) throw ParameterError("panel count must be at least 2");
  if (static_cast<std::size_t>(panel_count) > frame_count) {
    throw ParameterError("panel count " + std::to_string(panel_count) + " exceeds the " +
                         std::to_string(frame_count) + " available frames");
  }
  std::vector<std::size_t> ranks;
  const double step = static_cast<double>(frame_count - 1) / static_cast<double>(panel_count - 1);
  for (int64_t j = 0; j < panel_count; ++j) {
    ranks.push_back(static_cast<std::size_t>(std::llround(step * static_cast<double>(j))));
  }
  return ranks;
}

namespace {

SamplePair compose(const ExposureSequence& seq, const std::vector<std::size_t>& sources,
                   const std::string& suffix, PanelLayout* layout) {
  const auto& first = seq.frames.front();
  for (const auto& f : seq.frames) {
    if (!f.sizes().equals(first.sizes())) {
      throw DimensionError("scene " + seq.id + ": frames differ in size");
    }
  }
  const int64_t k = static_cast<int64_t>(sources.size());
  const auto bounds = panel_boundaries(first.size(-1), k);
  auto out = torch::empty_like(first);
  for (int64_t j = 0; j < k; ++j) {
    const int64_t lo = bounds[j], hi = bounds[j + 1];
    out.narrow(-1, lo, hi - lo).copy_(seq.frames[sources[j]].narrow(-1, lo, hi - lo));
  }
  if (layout) *layout = {k, sources, bounds};
  return {out, seq.reference, seq.id + suffix};
}

}  // namespace

SamplePair compose_grad(const ExposureSequence& seq, int64_t panel_count, PanelLayout* layout) {
  if (seq.frames.empty()) throw ParameterError("scene " + seq.id + " has no frames");
  return compose(seq, grad_ranks(seq.frames.size(), panel_count), "_grad", layout);
}

SamplePair compose_mix(const ExposureSequence& seq, int64_t panel_count,
                       const std::vector<std::size_t>& permutation, PanelLayout* layout) {
  if (seq.frames.empty()) throw ParameterError("scene " + seq.id + " has no frames");
  const auto ranks = grad_ranks(seq.frames.size(), panel_count);
  if (permutation.size() != ranks.size()) {
    throw ParameterError("permutation length does not match the panel count");
  }
  std::vector<bool> seen(ranks.size(), false);
  for (auto p : permutation) {
    if (p >= ranks.size() || seen[p]) throw ParameterError("invalid panel permutation");
    seen[p] = true;
  }
  std::vector<std::size_t> sources;
  for (auto p : permutation) sources.push_back(ranks[p]);
  return compose(seq, sources, "_mix", layout);
}

std::vector<std::size_t> seeded_permutation(int64_t panel_count, uint64_t seed) {
  if (panel_count < 1) throw ParameterError("panel count must be positive");
  std::vector<std::size_t> perm(static_cast<std::size_t>(panel_count));
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  // Explicit Fisher-Yates: std::shuffle's draw sequence is implementation-defined.
  std::mt19937_64 rng(seed);
  for (std::size_t i = perm.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng() % i);
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

SamplePair compose_mix(const ExposureSequence& seq, int64_t panel_count, uint64_t seed,
                       PanelLayout* layout) {
  return compose_mix(seq, panel_count, seeded_permutation(panel_count, seed), layout);
}

ScenePairs::ScenePairs(std::vector<SceneDescriptor> scenes, pyramid::Size2 size)
    : scenes_(std::move(scenes)), size_(size) {
  for (std::size_t s = 0; s < scenes_.size(); ++s) {
    for (std::size_t f = 0; f < scenes_[s].frame_paths.size(); ++f) index_.emplace_back(s, f);
  }
}

SamplePair ScenePairs::get(std::size_t index) const {
  const auto [s, f] = index_.at(index);
  const auto& scene = scenes_[s];
  SamplePair pair{io::read_image(scene.frame_paths[f]), io::read_image(scene.reference_path),
                  scene.id + "/" + scene.frame_paths[f].stem().string()};
  return resize_pair(pair, size_);
}

namespace {

// Smooth colourful scene in [0.1, 0.9] built from a few random plane waves.
torch::Tensor synthetic_reference(pyramid::Size2 size, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto h = size[0], w = size[1];
  auto ys = torch::linspace(0.0, 1.0, h, torch::kFloat64).view({h, 1});
  auto xs = torch::linspace(0.0, 1.0, w, torch::kFloat64).view({1, w});
  auto img = torch::zeros({3, h, w}, torch::kFloat64);
  for (int c = 0; c < 3; ++c) {
    auto chan = torch::full({h, w}, 0.5, torch::kFloat64);
    for (int wave = 0; wave < 4; ++wave) {
      const double fy = 0.5 + 3.5 * unit(rng), fx = 0.5 + 3.5 * unit(rng);
      const double phase = 2.0 * M_PI * unit(rng);
      const double amp = (wave < 2 ? 0.18 : 0.05) * (0.5 + unit(rng));
      chan = chan + amp * torch::sin(2.0 * M_PI * (fy * ys + fx * xs) + phase);
    }
    img[c] = chan;
  }
  return img.clamp(0.1, 0.9);
}

// Exposure curve: t < 0 darkens (x^(1+|t|a)), t > 0 brightens (1-(1-x)^(1+t a)).
torch::Tensor apply_exposure(const torch::Tensor& img, const torch::Tensor& t, double strength) {
  auto gamma = 1.0 + t.abs() * strength;
  auto dark = img.pow(gamma);
  auto bright = 1.0 - (1.0 - img).pow(gamma);
  return torch::where(t < 0, dark, bright);
}

}  // namespace

std::vector<SamplePair> make_synthetic_pairs(std::size_t count, pyramid::Size2 size, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<SamplePair> pairs;
  for (std::size_t i = 0; i < count; ++i) {
    auto ref = synthetic_reference(size, rng);
    // Exposure drifts horizontally from one extreme to the other.
    const double left = -0.6 - 0.4 * unit(rng), right = 0.6 + 0.4 * unit(rng);
    const bool flip = unit(rng) < 0.5;
    auto ramp = torch::linspace(flip ? right : left, flip ? left : right, size[1], torch::kFloat64)
                    .view({1, 1, size[1]})
                    .expand({3, size[0], size[1]});
    auto degraded = apply_exposure(ref, ramp, 1.0 + unit(rng));
    pairs.push_back({degraded.to(torch::kFloat32), ref.to(torch::kFloat32),
                     "synthetic_" + std::to_string(i)});
  }
  return pairs;
}

ExposureSequence make_synthetic_sequence(std::size_t frame_count, pyramid::Size2 size,
                                         uint64_t seed) {
  std::mt19937_64 rng(seed);
  ExposureSequence seq;
  seq.id = "synthetic_scene_" + std::to_string(seed);
  auto ref = synthetic_reference(size, rng);
  seq.reference = ref.to(torch::kFloat32);
  for (std::size_t i = 0; i < frame_count; ++i) {
    const double t = frame_count == 1 ? 0.0
                                      : -1.0 + 2.0 * static_cast<double>(i) /
                                                   static_cast<double>(frame_count - 1);
    auto level = torch::full({3, size[0], size[1]}, t, torch::kFloat64);
    seq.frames.push_back(apply_exposure(ref, level, 1.5).to(torch::kFloat32));
  }
  return seq;
}

}  // namespace hipyr::data
