#include "hipyr/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "hipyr/errors.hpp"

namespace hipyr::training {

using nlohmann::json;

namespace {

std::unique_ptr<torch::optim::Optimizer> make_optimizer(OptimizerKind kind,
                                                        std::vector<torch::Tensor> params,
                                                        double lr) {
  if (kind == OptimizerKind::kAdam) {
    return std::make_unique<torch::optim::Adam>(std::move(params), torch::optim::AdamOptions(lr));
  }
  return std::make_unique<torch::optim::SGD>(std::move(params), torch::optim::SGDOptions(lr));
}

KernelStats kernel_stats(const torch::Tensor& kernel) {
  auto k = kernel.detach().to(torch::kFloat64);
  return {k.min().item<double>(), k.max().item<double>(), k.mean().item<double>(),
          k.sum().item<double>()};
}

void save_module(CheckpointData& data, const std::string& prefix, const torch::nn::Module& m) {
  for (const auto& item : m.named_parameters()) data.blobs.emplace_back(prefix + item.key(), item.value());
}

void load_module(const CheckpointData& data, const std::string& prefix, torch::nn::Module& m) {
  torch::NoGradGuard no_grad;
  for (auto& item : m.named_parameters()) {
    const auto& src = data.blob(prefix + item.key());
    if (!src.sizes().equals(item.value().sizes())) {
      throw IoError("checkpoint shape mismatch for " + prefix + item.key());
    }
    item.value().copy_(src);
  }
}

void save_adam(CheckpointData& data, json& steps, const std::string& prefix,
               torch::optim::Optimizer& opt, const torch::nn::Module& m) {
  auto& state = opt.state();
  for (const auto& item : m.named_parameters()) {
    auto it = state.find(item.value().unsafeGetTensorImpl());
    if (it == state.end()) continue;
    auto& s = static_cast<torch::optim::AdamParamState&>(*it->second);
    steps[item.key()] = s.step();
    data.blobs.emplace_back(prefix + item.key() + ".exp_avg", s.exp_avg());
    data.blobs.emplace_back(prefix + item.key() + ".exp_avg_sq", s.exp_avg_sq());
  }
}

void load_adam(const CheckpointData& data, const json& steps, const std::string& prefix,
               torch::optim::Optimizer& opt, torch::nn::Module& m) {
  for (auto& item : m.named_parameters()) {
    if (!steps.contains(item.key())) continue;
    auto s = std::make_unique<torch::optim::AdamParamState>();
    s->step(steps.at(item.key()).get<int64_t>());
    s->exp_avg(data.blob(prefix + item.key() + ".exp_avg").clone());
    s->exp_avg_sq(data.blob(prefix + item.key() + ".exp_avg_sq").clone());
    opt.state()[item.value().unsafeGetTensorImpl()] = std::move(s);
  }
}

}  // namespace

Batch make_batch(const std::vector<data::SamplePair>& pairs) {
  if (pairs.empty()) throw ParameterError("empty batch");
  std::vector<torch::Tensor> d, r;
  for (const auto& p : pairs) {
    d.push_back(p.degraded);
    r.push_back(p.reference);
  }
  return {torch::stack(d), torch::stack(r)};
}

json log_record(const StepReport& r) {
  return json{{"step", r.step},
              {"l_pix", r.losses.l_pix},
              {"l_ker", r.losses.l_ker},
              {"l_gan", r.losses.l_gan},
              {"l_total", r.losses.l_total},
              {"d_loss", r.d_loss}};
}

Trainer::Trainer(TrainConfig config) : config_(std::move(config)) {
  config_.validate();
  torch::manual_seed(config_.seed);
  generator_ = translator::HipyrNet(config_.translator());
  discriminator_ = adversary::Discriminator(config_.discriminator());
  opt_g_ = make_optimizer(config_.optimizer, generator_->parameters(), config_.learning_rate);
  opt_d_ = make_optimizer(config_.optimizer, discriminator_->parameters(), config_.learning_rate);
  anchor_ = hypernet::gaussian_anchor();
}

StepReport Trainer::train_step(const Batch& batch) {
  if (!batch.degraded.sizes().equals(batch.reference.sizes())) {
    throw DimensionError("batch degraded/reference shapes differ");
  }
  const auto type = config_.gan_type;
  StepReport report;
  report.step = step_ + 1;

  generator_->train();
  auto kernel = generator_->hypernet()->forward(batch.degraded);
  report.kernel = kernel_stats(kernel);
  report.d_loss = NAN;
  auto diagnostic = [&](double gan, double pix, double ker) {
    std::ostringstream msg;
    msg << "non-finite loss at step " << report.step << ": l_gan=" << gan << " l_pix=" << pix
        << " l_ker=" << ker << " d_loss=" << report.d_loss << " kernel[min=" << report.kernel.min
        << " max=" << report.kernel.max << " mean=" << report.kernel.mean
        << " sum=" << report.kernel.sum << "]";
    return NumericError(msg.str());
  };
  if (!std::isfinite(report.kernel.sum)) throw diagnostic(NAN, NAN, NAN);
  auto out = generator_->forward_with_kernel(batch.degraded, kernel);

  // Discriminator phase.
  adversary::set_trainable(*discriminator_, true);
  opt_d_->zero_grad();
  auto d_real = discriminator_->forward(batch.reference);
  auto d_fake = discriminator_->forward(out.enhanced.detach());
  auto d_loss = losses::gan_discriminator_loss(d_real, d_fake, type);
  report.d_loss = d_loss.item<double>();
  if (!std::isfinite(report.d_loss)) throw diagnostic(NAN, NAN, NAN);
  d_loss.backward();
  opt_d_->step();

  // Generator phase, discriminator frozen.
  adversary::set_trainable(*discriminator_, false);
  report.disc_checksum_before_g = adversary::parameter_checksum(*discriminator_);
  auto l_gan = losses::gan_generator_loss(discriminator_->forward(out.enhanced), type);
  auto l_pix = losses::pixel_loss(out.enhanced, batch.reference);
  auto l_ker = losses::kernel_loss(out.predicted_kernel, anchor_);
  auto total = losses::weighted_total(l_gan, l_pix, l_ker, config_.weights());

  const double gan = l_gan.item<double>(), pix = l_pix.item<double>(), ker = l_ker.item<double>();
  if (!std::isfinite(gan) || !std::isfinite(pix) || !std::isfinite(ker)) {
    adversary::set_trainable(*discriminator_, true);
    throw diagnostic(gan, pix, ker);
  }
  report.losses = losses::total_generator_loss(gan, pix, ker, config_.weights());

  opt_g_->zero_grad();
  total.backward();
  opt_g_->step();
  report.disc_checksum_after_g = adversary::parameter_checksum(*discriminator_);
  adversary::set_trainable(*discriminator_, true);
  if (report.disc_checksum_after_g != report.disc_checksum_before_g) {
    throw std::logic_error("discriminator parameters changed during the generator update");
  }
  ++step_;
  return report;
}

CheckpointData Trainer::to_checkpoint() const {
  CheckpointData data;
  json g_steps = json::object(), d_steps = json::object();
  save_module(data, "generator.", *generator_);
  save_module(data, "discriminator.", *discriminator_);
  if (config_.optimizer == OptimizerKind::kAdam) {
    save_adam(data, g_steps, "optim_g.", *opt_g_, *generator_);
    save_adam(data, d_steps, "optim_d.", *opt_d_, *discriminator_);
  }
  data.meta = json{{"config", to_json(config_)},
                   {"step", step_},
                   {"optim_g_steps", g_steps},
                   {"optim_d_steps", d_steps}};
  return data;
}

Trainer Trainer::from_checkpoint(const CheckpointData& data) {
  Trainer t(config_from_json(data.meta.at("config")));
  load_module(data, "generator.", *t.generator_);
  load_module(data, "discriminator.", *t.discriminator_);
  if (t.config_.optimizer == OptimizerKind::kAdam) {
    load_adam(data, data.meta.at("optim_g_steps"), "optim_g.", *t.opt_g_, *t.generator_);
    load_adam(data, data.meta.at("optim_d_steps"), "optim_d.", *t.opt_d_, *t.discriminator_);
  }
  t.step_ = data.meta.at("step").get<int64_t>();
  return t;
}

void Trainer::save(const std::filesystem::path& path) const {
  write_checkpoint(path, to_checkpoint());
}

Trainer Trainer::load(const std::filesystem::path& path) {
  return from_checkpoint(read_checkpoint(path));
}

torch::Tensor enhance(translator::HipyrNet& generator, const torch::Tensor& image) {
  torch::NoGradGuard no_grad;
  auto x = image.dim() == 3 ? image.unsqueeze(0) : image;
  auto out = generator->forward(x).enhanced.clamp(0.0, 1.0);
  return image.dim() == 3 ? out.squeeze(0) : out;
}

metrics::MetricReport evaluate(translator::HipyrNet& generator, const data::PairSource& pairs) {
  metrics::MetricReport report;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    data::SamplePair pair;
    try {
      pair = pairs.get(i);
      auto out = enhance(generator, pair.degraded);
      report.per_image.push_back(
          {pair.id, metrics::psnr(out, pair.reference), metrics::ssim(out, pair.reference)});
    } catch (const std::exception& e) {
      report.failures.push_back((pair.id.empty() ? "#" + std::to_string(i) : pair.id) + ": " +
                                e.what());
    }
  }
  metrics::finalize(report);
  return report;
}

namespace {

// Wraps a source and resizes pairs that do not match the training size.
class ResizedSource : public data::PairSource {
 public:
  ResizedSource(const data::PairSource& inner, pyramid::Size2 size) : inner_(inner), size_(size) {}
  std::size_t size() const override { return inner_.size(); }
  data::SamplePair get(std::size_t i) const override {
    auto p = inner_.get(i);
    if (pyramid::spatial_size(p.degraded) == size_ && pyramid::spatial_size(p.reference) == size_) {
      return p;
    }
    return data::resize_pair(p, size_);
  }

 private:
  const data::PairSource& inner_;
  pyramid::Size2 size_;
};

}  // namespace

FitResult fit(const TrainConfig& config, const data::PairSource& train_in,
              const data::PairSource* val_in, const FitOptions& options) {
  config.validate();
  if (train_in.size() == 0) throw ConfigError("training split is empty");
  ResizedSource train(train_in, config.image_size);
  std::optional<ResizedSource> val;
  if (val_in && val_in->size() > 0) val.emplace(*val_in, config.image_size);

  FitResult result{Trainer(config), {}, {}, std::nullopt, 0};
  Trainer& trainer = result.trainer;

  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(train.size());
  std::size_t cursor = order.size();
  auto next_index = [&] {
    if (cursor == order.size()) {
      std::iota(order.begin(), order.end(), std::size_t{0});
      for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
      cursor = 0;
    }
    return order[cursor++];
  };

  auto validate_now = [&](int64_t step) {
    if (!val) return;
    auto report = evaluate(trainer.generator(), *val);
    const bool better =
        report.psnr_db && (!result.best_val || !result.best_val->psnr_db ||
                           *report.psnr_db > *result.best_val->psnr_db);
    if (better) {
      result.best_val = std::move(report);
      result.best_val_step = step;
      if (options.checkpoint_dir) trainer.save(*options.checkpoint_dir / "best.ckpt");
    }
  };

  for (int64_t step = 1; step <= config.max_steps; ++step) {
    std::vector<data::SamplePair> pairs;
    for (int64_t b = 0; b < config.batch_size; ++b) pairs.push_back(train.get(next_index()));
    auto report = trainer.train_step(make_batch(pairs));
    if (options.log) *options.log << log_record(report).dump() << '\n';
    if (options.on_step) options.on_step(report);
    result.history.push_back(report);
    if (config.val_every > 0 && step % config.val_every == 0 && step != config.max_steps) {
      validate_now(step);
    }
  }
  validate_now(config.max_steps);
  if (options.checkpoint_dir) {
    trainer.save(*options.checkpoint_dir / "latest.ckpt");
    if (!val) trainer.save(*options.checkpoint_dir / "best.ckpt");
  }
  result.final_train = evaluate(trainer.generator(), train);
  return result;
}

}  // namespace hipyr::training
