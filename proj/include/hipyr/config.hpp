#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>

#include "json.hpp"

#include "hipyr/adversary.hpp"
#include "hipyr/losses.hpp"
#include "hipyr/pyramid.hpp"
#include "hipyr/translator.hpp"

namespace hipyr::training {

enum class OptimizerKind { kAdam, kSgd };

std::string_view to_string(OptimizerKind kind);
OptimizerKind parse_optimizer(std::string_view name);

/// Experiment configuration. The JSON config file uses exactly these field
/// names; unknown keys are rejected and missing keys take the defaults below.
struct TrainConfig {
  double learning_rate = 1e-4;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  losses::GanType gan_type = losses::GanType::kWganSoftplus;
  double eta_pix = 1000.0;
  double lambda_ker = 0.01;
  int ltm_blocks = 2;
  int utm_blocks = 4;
  int64_t max_steps = 10000;
  int64_t batch_size = 4;
  uint64_t seed = 0;
  pyramid::Size2 image_size{608, 896};

  int64_t base_channels = 16;
  int pyramid_levels = pyramid::kDefaultLevels;
  int disc_layers = 4;
  int64_t disc_channels = 16;
  int64_t val_every = 0;  // 0: validate once, after the last step

  void validate() const;

  losses::LossWeights weights() const { return {eta_pix, lambda_ker}; }
  translator::TranslatorConfig translator() const;
  adversary::DiscriminatorConfig discriminator() const;
};

nlohmann::json to_json(const TrainConfig& config);
TrainConfig config_from_json(const nlohmann::json& j);
TrainConfig load_config(const std::filesystem::path& path);

}  // namespace hipyr::training
