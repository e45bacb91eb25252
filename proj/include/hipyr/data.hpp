#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "hipyr/pyramid.hpp"

namespace hipyr::data {

inline constexpr pyramid::Size2 kSiceSize{608, 896};

struct SamplePair {
  torch::Tensor degraded;   // (3,H,W)
  torch::Tensor reference;  // (3,H,W), the well-exposed target
  std::string id;
};

/// One scene on disk. `frame_paths` is ordered dark to bright when
/// `indexed` is true (numeric file stems); otherwise ordering is settled by
/// mean luminance when the frames are loaded.
struct SceneDescriptor {
  std::string id;
  std::vector<std::filesystem::path> frame_paths;
  std::filesystem::path reference_path;
  bool indexed = true;
};

/// Loaded frames of one scene, ordered by increasing exposure.
struct ExposureSequence {
  std::string id;
  std::vector<torch::Tensor> frames;
  torch::Tensor reference;
};

enum class Split { kTrain, kVal, kTest };
std::string_view to_string(Split split);

struct ManifestRecord {
  std::string id;
  std::string split;  // train | val | test | skipped
  std::vector<std::string> paths;
  std::string note;
};

struct SiceSplits {
  std::vector<SceneDescriptor> train, val, test;
  std::vector<ManifestRecord> manifest;
  std::vector<std::string> warnings;
};

struct LoadOptions {
  // Decode every image during the scan so unreadable files are caught early.
  bool verify_images = true;
};

/// Scans `root/scenes/<scene>/<frame>.{png,jpg}` with references at
/// `root/labels/<scene>.{png,jpg}` and splits scenes 8:1:1.
///
/// Scenes are ordered by a stable 64-bit FNV-1a hash of their id; the last
/// round(n/10) go to test, the preceding round(n/10) to val. When
/// `root/test_index.txt` exists (one scene id per line), exactly those scenes
/// form the test split and val is drawn from the rest. A scene without a
/// reference raises IngestionError; an unreadable frame is dropped with a
/// warning and a "skipped" manifest record.
SiceSplits load_sice(const std::filesystem::path& root, const LoadOptions& options = {});

/// Writes newline-delimited manifest records: id <TAB> split <TAB> paths
/// (comma-separated) [<TAB> note].
void write_manifest(const std::filesystem::path& path, const std::vector<ManifestRecord>& records);

uint64_t stable_hash(std::string_view text);

/// Mean of the Rec.601 luma of a (3,H,W) image.
double mean_luminance(const torch::Tensor& image);

/// Loads frames and reference; optionally resizes everything to `size`.
ExposureSequence load_sequence(const SceneDescriptor& scene,
                               std::optional<pyramid::Size2> size = std::nullopt);

/// Bilinear resize (half-pixel centres, no antialiasing) of (C,H,W) or
/// (N,C,H,W). Resizing to the current size returns an exact copy.
torch::Tensor resize_bilinear(const torch::Tensor& image, pyramid::Size2 size);

/// Resizes both images of the pair; size must be divisible by 4.
SamplePair resize_pair(const SamplePair& pair, pyramid::Size2 size = kSiceSize);

struct PanelLayout {
  int64_t panel_count = 0;
  std::vector<std::size_t> source_indices;  // exposure rank feeding each panel
  std::vector<int64_t> boundaries;          // panel_count + 1 column offsets
};

/// Near-equal vertical panels over `width`; the first width % k panels get
/// one extra column.
std::vector<int64_t> panel_boundaries(int64_t width, int64_t panel_count);

/// Exposure ranks used for k panels out of n frames: evenly spaced from the
/// darkest (0) to the brightest (n-1); the identity when k == n.
std::vector<std::size_t> grad_ranks(std::size_t frame_count, int64_t panel_count);

/// Panels of increasing exposure left to right, copied bit-exactly from the
/// source frames. Reference is the scene reference.
SamplePair compose_grad(const ExposureSequence& seq, int64_t panel_count,
                        PanelLayout* layout = nullptr);

/// As compose_grad, but panel j takes the frame that compose_grad would put in
/// panel permutation[j].
SamplePair compose_mix(const ExposureSequence& seq, int64_t panel_count,
                       const std::vector<std::size_t>& permutation, PanelLayout* layout = nullptr);

/// Reproducible Fisher-Yates shuffle of 0..k-1 driven by mt19937_64(seed).
std::vector<std::size_t> seeded_permutation(int64_t panel_count, uint64_t seed);

SamplePair compose_mix(const ExposureSequence& seq, int64_t panel_count, uint64_t seed,
                       PanelLayout* layout = nullptr);

/// Random-access source of training/evaluation pairs.
class PairSource {
 public:
  virtual ~PairSource() = default;
  virtual std::size_t size() const = 0;
  virtual SamplePair get(std::size_t index) const = 0;
};

class InMemoryPairs : public PairSource {
 public:
  InMemoryPairs() = default;
  explicit InMemoryPairs(std::vector<SamplePair> pairs) : pairs_(std::move(pairs)) {}

  std::size_t size() const override { return pairs_.size(); }
  SamplePair get(std::size_t index) const override { return pairs_.at(index); }
  void push_back(SamplePair pair) { pairs_.push_back(std::move(pair)); }

 private:
  std::vector<SamplePair> pairs_;
};

/// Every (frame, reference) combination of the given scenes, loaded lazily
/// and resized to `size`.
class ScenePairs : public PairSource {
 public:
  ScenePairs(std::vector<SceneDescriptor> scenes, pyramid::Size2 size);

  std::size_t size() const override { return index_.size(); }
  SamplePair get(std::size_t index) const override;

 private:
  std::vector<SceneDescriptor> scenes_;
  std::vector<std::pair<std::size_t, std::size_t>> index_;  // (scene, frame)
  pyramid::Size2 size_;
};

/// Deterministic toy pairs: a smooth textured reference and a mixed-exposure
/// degraded version (darkened on one side, brightened on the other, with a
/// per-pair exposure curve).
std::vector<SamplePair> make_synthetic_pairs(std::size_t count, pyramid::Size2 size,
                                             uint64_t seed);

/// Deterministic exposure sequence (dark to bright) built from a synthetic
/// reference, for composer demos and tests.
ExposureSequence make_synthetic_sequence(std::size_t frame_count, pyramid::Size2 size,
                                         uint64_t seed);

}  // namespace hipyr::data
