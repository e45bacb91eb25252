#include "hipyr/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "hipyr/errors.hpp"

namespace hipyr::training {

using nlohmann::json;

std::string_view to_string(OptimizerKind kind) {
  return kind == OptimizerKind::kAdam ? "adam" : "sgd";
}

OptimizerKind parse_optimizer(std::string_view name) {
  if (name == "adam") return OptimizerKind::kAdam;
  if (name == "sgd") return OptimizerKind::kSgd;
  throw ConfigError("unknown optimizer '" + std::string(name) + "' (expected adam or sgd)");
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning_rate must be > 0");
  }
  weights().validate();
  if (max_steps < 0) throw ConfigError("max_steps must be >= 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (val_every < 0) throw ConfigError("val_every must be >= 0");
  translator().validate();
  discriminator().validate();
  const int64_t div = std::max<int64_t>(int64_t{1} << (pyramid_levels - 1), int64_t{1} << disc_layers);
  if (image_size[0] % div != 0 || image_size[1] % div != 0) {
    throw ConfigError("image_size must be divisible by " + std::to_string(div));
  }
  if (image_size[0] < 32 || image_size[1] < 32) throw ConfigError("image_size must be >= 32x32");
}

translator::TranslatorConfig TrainConfig::translator() const {
  translator::TranslatorConfig t;
  t.ltm_blocks = ltm_blocks;
  t.utm_blocks = utm_blocks;
  t.base_channels = base_channels;
  t.levels = pyramid_levels;
  return t;
}

adversary::DiscriminatorConfig TrainConfig::discriminator() const {
  return {disc_layers, disc_channels};
}

json to_json(const TrainConfig& c) {
  return json{{"learning_rate", c.learning_rate},
              {"optimizer", std::string(to_string(c.optimizer))},
              {"gan_type", std::string(losses::to_string(c.gan_type))},
              {"eta_pix", c.eta_pix},
              {"lambda_ker", c.lambda_ker},
              {"ltm_blocks", c.ltm_blocks},
              {"utm_blocks", c.utm_blocks},
              {"max_steps", c.max_steps},
              {"batch_size", c.batch_size},
              {"seed", c.seed},
              {"image_size", {c.image_size[0], c.image_size[1]}},
              {"base_channels", c.base_channels},
              {"pyramid_levels", c.pyramid_levels},
              {"disc_layers", c.disc_layers},
              {"disc_channels", c.disc_channels},
              {"val_every", c.val_every}};
}

TrainConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> known = [] {
    std::set<std::string> keys;
    const json defaults = to_json(TrainConfig{});
    for (const auto& [k, v] : defaults.items()) keys.insert(k);
    return keys;
  }();
  for (const auto& [k, v] : j.items()) {
    if (!known.count(k)) throw ConfigError("unknown config key '" + k + "'");
  }
  TrainConfig c;
  try {
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("learning_rate", c.learning_rate);
    if (j.contains("optimizer")) c.optimizer = parse_optimizer(j.at("optimizer").get<std::string>());
    if (j.contains("gan_type")) c.gan_type = losses::parse_gan_type(j.at("gan_type").get<std::string>());
    get("eta_pix", c.eta_pix);
    get("lambda_ker", c.lambda_ker);
    get("ltm_blocks", c.ltm_blocks);
    get("utm_blocks", c.utm_blocks);
    get("max_steps", c.max_steps);
    get("batch_size", c.batch_size);
    get("seed", c.seed);
    if (j.contains("image_size")) {
      const auto& s = j.at("image_size");
      if (!s.is_array() || s.size() != 2) throw ConfigError("image_size must be [height, width]");
      c.image_size = {s[0].get<int64_t>(), s[1].get<int64_t>()};
    }
    get("base_channels", c.base_channels);
    get("pyramid_levels", c.pyramid_levels);
    get("disc_layers", c.disc_layers);
    get("disc_channels", c.disc_channels);
    get("val_every", c.val_every);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config type error: ") + e.what());
  }
  c.validate();
  return c;
}

TrainConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("cannot parse " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

}  // namespace hipyr::training
