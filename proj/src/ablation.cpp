#include "hipyr/ablation.hpp"

#include <cstdio>

#include "hipyr/trainer.hpp"

namespace hipyr::training {

namespace {

AblationRow run_one(TrainConfig config, const data::PairSource& train,
                    const data::PairSource& eval, int64_t steps) {
  AblationRow row;
  row.utm_blocks = config.utm_blocks;
  row.ltm_blocks = config.ltm_blocks;
  row.gan_type = config.gan_type;
  config.max_steps = steps;
  config.val_every = 0;
  try {
    auto result = fit(config, train);
    row.report = evaluate(result.trainer.generator(), eval);
    row.ok = row.report.psnr_db.has_value() && row.report.failures.empty();
    if (!row.ok) row.error = "evaluation produced no finite metrics";
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  return row;
}

std::string metric(const std::optional<double>& v, const char* fmt) {
  if (!v) return "-";
  char buf[32];
  std::snprintf(buf, sizeof(buf), fmt, *v);
  return buf;
}

}  // namespace

std::vector<AblationRow> run_block_ablation(const TrainConfig& base, const data::PairSource& train,
                                            const data::PairSource& eval, int64_t steps) {
  std::vector<AblationRow> rows;
  for (const auto& [utm, ltm] : kBlockSweep) {
    auto config = base;
    config.utm_blocks = utm;
    config.ltm_blocks = ltm;
    rows.push_back(run_one(config, train, eval, steps));
  }
  return rows;
}

std::vector<AblationRow> run_gan_ablation(const TrainConfig& base, const data::PairSource& train,
                                          const data::PairSource& eval, int64_t steps) {
  std::vector<AblationRow> rows;
  for (auto type : losses::kAllGanTypes) {
    auto config = base;
    config.gan_type = type;
    rows.push_back(run_one(config, train, eval, steps));
  }
  return rows;
}

std::string format_block_table(const std::vector<AblationRow>& rows) {
  std::string out;
  char line[128];
  std::snprintf(line, sizeof(line), "%-5s %-5s %-8s %-8s\n", "UTM", "LTM", "PSNR", "SSIM");
  out += line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof(line), "%-5d %-5d %-8s %-8s\n", r.utm_blocks, r.ltm_blocks,
                  metric(r.report.psnr_db, "%.3f").c_str(), metric(r.report.ssim, "%.5f").c_str());
    out += line;
  }
  return out;
}

std::string format_gan_table(const std::vector<AblationRow>& rows) {
  std::string out;
  char line[128];
  std::snprintf(line, sizeof(line), "%-18s %-8s %-8s\n", "GAN Loss Function", "PSNR", "SSIM");
  out += line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof(line), "%-18s %-8s %-8s\n",
                  std::string(losses::display_name(r.gan_type)).c_str(),
                  metric(r.report.psnr_db, "%.3f").c_str(), metric(r.report.ssim, "%.5f").c_str());
    out += line;
  }
  return out;
}

std::string format_metric_table(const std::vector<MetricTableRow>& rows) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-12s %-12s %-8s %-8s\n", "Dataset", "Method", "PSNR", "SSIM");
  out += line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof(line), "%-12s %-12s %-8s %-8s\n", r.dataset.c_str(),
                  r.method.c_str(), metric(r.report.psnr_db, "%.3f").c_str(),
                  metric(r.report.ssim, "%.3f").c_str());
    out += line;
  }
  return out;
}

}  // namespace hipyr::training
