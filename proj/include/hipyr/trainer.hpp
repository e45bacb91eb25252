#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <vector>

#include <torch/torch.h>

#include "hipyr/adversary.hpp"
#include "hipyr/checkpoint.hpp"
#include "hipyr/config.hpp"
#include "hipyr/data.hpp"
#include "hipyr/losses.hpp"
#include "hipyr/metrics.hpp"
#include "hipyr/translator.hpp"

namespace hipyr::training {

struct Batch {
  torch::Tensor degraded;   // (N,3,H,W)
  torch::Tensor reference;  // (N,3,H,W)
};

Batch make_batch(const std::vector<data::SamplePair>& pairs);

struct KernelStats {
  double min = 0.0, max = 0.0, mean = 0.0, sum = 0.0;
};

struct StepReport {
  int64_t step = 0;  // 1-based index of the completed step
  losses::LossBundle losses;
  double d_loss = 0.0;
  uint64_t disc_checksum_before_g = 0;
  uint64_t disc_checksum_after_g = 0;
  KernelStats kernel;
};

/// Newline-delimited log record: step, l_pix, l_ker, l_gan, l_total, d_loss.
nlohmann::json log_record(const StepReport& report);

/// Generator, discriminator and their optimizers.
///
/// Each train_step runs one discriminator update on references vs. detached
/// generator outputs, then one generator + hypernet update on
/// L_GAN + eta_pix L_pix + lambda_ker L_ker with the discriminator frozen.
class Trainer {
 public:
  explicit Trainer(TrainConfig config);

  Trainer(Trainer&&) noexcept = default;
  Trainer& operator=(Trainer&&) noexcept = default;

  /// Throws NumericError (with step, losses and kernel statistics) if any
  /// loss is non-finite; parameters are not updated in that case.
  StepReport train_step(const Batch& batch);

  translator::HipyrNet& generator() { return generator_; }
  adversary::Discriminator& discriminator() { return discriminator_; }
  const TrainConfig& config() const { return config_; }
  int64_t step() const { return step_; }

  CheckpointData to_checkpoint() const;
  static Trainer from_checkpoint(const CheckpointData& data);
  void save(const std::filesystem::path& path) const;
  static Trainer load(const std::filesystem::path& path);

 private:
  TrainConfig config_;
  translator::HipyrNet generator_{nullptr};
  adversary::Discriminator discriminator_{nullptr};
  std::unique_ptr<torch::optim::Optimizer> opt_g_;
  std::unique_ptr<torch::optim::Optimizer> opt_d_;
  torch::Tensor anchor_;
  int64_t step_ = 0;
};

/// Runs the generator on each pair (no gradient), clamps to [0,1] and scores
/// PSNR/SSIM against the reference. Pairs that fail (e.g. incompatible sizes)
/// are recorded in `failures` and skipped.
metrics::MetricReport evaluate(translator::HipyrNet& generator, const data::PairSource& pairs);

/// Enhances a single (3,H,W) image; the result is clamped to [0,1].
torch::Tensor enhance(translator::HipyrNet& generator, const torch::Tensor& image);

struct FitOptions {
  std::ostream* log = nullptr;  // NDJSON step records
  std::optional<std::filesystem::path> checkpoint_dir;  // best.ckpt / latest.ckpt
  std::function<void(const StepReport&)> on_step;
};

struct FitResult {
  Trainer trainer;
  std::vector<StepReport> history;
  metrics::MetricReport final_train;  // evaluate() on the train source at the end
  std::optional<metrics::MetricReport> best_val;
  int64_t best_val_step = 0;
};

/// Draws batches from a seeded reshuffle of `train`, runs max_steps steps,
/// validates every val_every steps and at the end, and keeps the
/// best-by-val-PSNR and latest checkpoints when a directory is given.
/// Pairs whose size differs from config.image_size are resized.
FitResult fit(const TrainConfig& config, const data::PairSource& train,
              const data::PairSource* val = nullptr, const FitOptions& options = {});

}  // namespace hipyr::training
