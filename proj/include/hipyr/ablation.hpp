#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "hipyr/config.hpp"
#include "hipyr/data.hpp"
#include "hipyr/metrics.hpp"

namespace hipyr::training {

/// (UTM blocks, LTM blocks) rows of the residual-block study.
inline constexpr std::array<std::pair<int, int>, 4> kBlockSweep{{{2, 3}, {2, 4}, {3, 2}, {4, 2}}};

struct AblationRow {
  int utm_blocks = 0;
  int ltm_blocks = 0;
  losses::GanType gan_type = losses::GanType::kWganSoftplus;
  metrics::MetricReport report;
  bool ok = false;
  std::string error;
};

/// Trains one model per (UTM, LTM) pair for `steps` steps from `base` and
/// evaluates it on `eval`. Failures are captured per row, not thrown.
std::vector<AblationRow> run_block_ablation(const TrainConfig& base, const data::PairSource& train,
                                            const data::PairSource& eval, int64_t steps);

/// Same, sweeping the five GAN variants.
std::vector<AblationRow> run_gan_ablation(const TrainConfig& base, const data::PairSource& train,
                                          const data::PairSource& eval, int64_t steps);

/// "UTM  LTM  PSNR  SSIM" table.
std::string format_block_table(const std::vector<AblationRow>& rows);

/// "GAN Loss Function  PSNR  SSIM" table.
std::string format_gan_table(const std::vector<AblationRow>& rows);

struct MetricTableRow {
  std::string dataset;
  std::string method;
  metrics::MetricReport report;
};

/// "Dataset  Method  PSNR  SSIM" summary table.
std::string format_metric_table(const std::vector<MetricTableRow>& rows);

}  // namespace hipyr::training
