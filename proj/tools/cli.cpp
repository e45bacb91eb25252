#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "hipyr/ablation.hpp"
#include "hipyr/data.hpp"
#include "hipyr/errors.hpp"
#include "hipyr/hypernet.hpp"
#include "hipyr/image_io.hpp"
#include "hipyr/pyramid.hpp"
#include "hipyr/pyramid_io.hpp"
#include "hipyr/trainer.hpp"

namespace hipyr::cli {

namespace fs = std::filesystem;
namespace F = torch::nn::functional;
using nlohmann::json;

namespace {

struct DecomposeArgs {
  std::string input, kernel, out_dir;
  int levels = pyramid::kDefaultLevels;
};

struct PredictArgs {
  std::string input, checkpoint, out;
};

struct EnhanceArgs {
  std::string input, checkpoint, out;
};

struct TrainArgs {
  std::string config, data, out = "runs";
  std::size_t synthetic = 0;
};

struct EvalArgs {
  std::string checkpoint, split = "test", data, report;
  int64_t panels = 0;
  uint64_t seed = 0;
};

struct GradMixArgs {
  std::string root, mode = "grad", out;
  int64_t panels = 0;
  uint64_t seed = 0;
};

void require_file(const std::string& path) {
  if (!fs::exists(path)) throw IoError("no such file or directory: " + path);
}

int run_decompose(const DecomposeArgs& a, std::ostream& out) {
  auto image = io::read_image(a.input);
  torch::Tensor kernel = a.kernel == "gaussian" ? hypernet::gaussian_anchor()
                                                : pyramid::read_kernel(a.kernel);
  auto pyr = pyramid::decompose(image, kernel, a.levels);
  auto records = pyramid::export_pyramid(a.out_dir, pyr);
  for (const auto& r : records) {
    out << r.file << ' ' << r.height << 'x' << r.width << " range [" << r.min_value << ", "
        << r.max_value << "]" << (r.clipped ? " (clipped " + std::to_string(r.clipped) + ")" : "")
        << '\n';
  }
  return 0;
}

int run_predict_kernel(const PredictArgs& a, std::ostream& out) {
  require_file(a.checkpoint);
  auto image = io::read_image(a.input);
  auto trainer = training::Trainer::load(a.checkpoint);
  torch::NoGradGuard no_grad;
  auto kernel = hypernet::predict_kernel(trainer.generator()->hypernet(), image);
  pyramid::write_kernel(a.out, kernel);
  pyramid::format_kernel(out, kernel);
  return 0;
}

// Pads (replicate) to a size the generator accepts, enhances, crops back.
torch::Tensor enhance_any_size(translator::HipyrNet& gen, const torch::Tensor& image) {
  const int64_t mult = int64_t{1} << (gen->config().levels - 1);
  const int64_t h = image.size(1), w = image.size(2);
  auto round_up = [&](int64_t v) {
    return std::max<int64_t>(((v + mult - 1) / mult) * mult,
                             std::max<int64_t>(hypernet::kMinInputSize, 2 * mult));
  };
  const int64_t ph = round_up(h) - h, pw = round_up(w) - w;
  auto padded = image;
  if (ph || pw) {
    padded = F::pad(image.unsqueeze(0), F::PadFuncOptions({0, pw, 0, ph}).mode(torch::kReplicate))
                 .squeeze(0);
  }
  auto out = training::enhance(gen, padded);
  return out.narrow(1, 0, h).narrow(2, 0, w).contiguous();
}

int run_enhance(const EnhanceArgs& a, std::ostream& out) {
  require_file(a.input);
  require_file(a.checkpoint);
  auto trainer = training::Trainer::load(a.checkpoint);
  std::vector<fs::path> inputs;
  if (fs::is_directory(a.input)) {
    inputs = io::list_images(a.input);
  } else {
    inputs.push_back(a.input);
  }
  for (const auto& in : inputs) {
    auto result = enhance_any_size(trainer.generator(), io::read_image(in));
    const auto dst = fs::path(a.out) / (in.stem().string() + ".png");
    io::write_png8(dst, result);
    out << dst.string() << '\n';
  }
  return 0;
}

int run_train(const TrainArgs& a, std::ostream& out) {
  require_file(a.config);
  auto config = training::load_config(a.config);
  std::unique_ptr<data::PairSource> train, val;
  if (!a.data.empty()) {
    auto splits = data::load_sice(a.data);
    data::write_manifest(fs::path(a.out) / "manifest.tsv", splits.manifest);
    train = std::make_unique<data::ScenePairs>(splits.train, config.image_size);
    val = std::make_unique<data::ScenePairs>(splits.val, config.image_size);
  } else if (a.synthetic > 0) {
    train = std::make_unique<data::InMemoryPairs>(
        data::make_synthetic_pairs(a.synthetic, config.image_size, config.seed));
    val = std::make_unique<data::InMemoryPairs>(
        data::make_synthetic_pairs(std::max<std::size_t>(1, a.synthetic / 4), config.image_size,
                                   config.seed + 1));
  } else {
    throw ConfigError("train needs --data <root> or --synthetic <count>");
  }
  fs::create_directories(a.out);
  std::ofstream log(fs::path(a.out) / "train_log.ndjson");
  training::FitOptions options;
  options.log = &log;
  options.checkpoint_dir = fs::path(a.out);
  auto result = training::fit(config, *train, val.get(), options);
  out << "steps " << result.trainer.step() << '\n';
  out << training::format_metric_table({{"train", "HipyrNet", result.final_train}});
  if (result.best_val) {
    out << "best val step " << result.best_val_step << '\n'
        << training::format_metric_table({{"val", "HipyrNet", *result.best_val}});
  }
  return 0;
}

json report_json(const metrics::MetricReport& report) {
  json agg{{"aggregate", true},
           {"count", report.per_image.size()},
           {"psnr", report.psnr_db ? json(*report.psnr_db) : json(nullptr)},
           {"ssim", report.ssim ? json(*report.ssim) : json(nullptr)},
           {"failures", report.failures}};
  return agg;
}

int run_eval(const EvalArgs& a, std::ostream& out) {
  require_file(a.checkpoint);
  require_file(a.data);
  auto trainer = training::Trainer::load(a.checkpoint);
  const auto size = trainer.config().image_size;
  auto splits = data::load_sice(a.data);

  std::unique_ptr<data::PairSource> source;
  std::string dataset = "SICE";
  if (a.split == "test") {
    source = std::make_unique<data::ScenePairs>(splits.test, size);
  } else {
    auto pairs = std::make_unique<data::InMemoryPairs>();
    for (const auto& scene : splits.test) {
      auto seq = data::load_sequence(scene, size);
      const int64_t k = a.panels > 0 ? a.panels : static_cast<int64_t>(seq.frames.size());
      pairs->push_back(a.split == "grad" ? data::compose_grad(seq, k)
                                         : data::compose_mix(seq, k, a.seed));
    }
    source = std::move(pairs);
    dataset = a.split == "grad" ? "SICE Grad" : "SICE Mix";
  }
  auto report = training::evaluate(trainer.generator(), *source);

  std::ofstream file;
  std::ostream* records = &out;
  if (!a.report.empty()) {
    file.open(a.report);
    if (!file) throw IoError("cannot write report: " + a.report);
    records = &file;
  }
  for (const auto& m : report.per_image) {
    *records << json{{"id", m.id}, {"psnr", m.psnr_db}, {"ssim", m.ssim}}.dump() << '\n';
  }
  *records << report_json(report).dump() << '\n';
  out << training::format_metric_table({{dataset, "HipyrNet", report}});
  return 0;
}

int run_make_gradmix(const GradMixArgs& a, std::ostream& out) {
  require_file(a.root);
  auto splits = data::load_sice(a.root);
  std::vector<data::ManifestRecord> manifest;
  std::size_t written = 0;
  for (const auto* list : {&splits.train, &splits.val, &splits.test}) {
    for (const auto& scene : *list) {
      auto seq = data::load_sequence(scene);
      const int64_t k = a.panels > 0 ? a.panels : static_cast<int64_t>(seq.frames.size());
      auto pair = a.mode == "grad" ? data::compose_grad(seq, k) : data::compose_mix(seq, k, a.seed);
      const auto img = fs::path(a.out) / "degraded" / (pair.id + ".png");
      const auto ref = fs::path(a.out) / "labels" / (pair.id + ".png");
      io::write_png8(img, pair.degraded);
      io::write_png8(ref, pair.reference);
      manifest.push_back({pair.id, a.mode, {img.string(), ref.string()}, {}});
      ++written;
    }
  }
  data::write_manifest(fs::path(a.out) / "manifest.tsv", manifest);
  out << "wrote " << written << " " << a.mode << " composites to " << a.out << '\n';
  return 0;
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hypernetwork-guided Laplacian pyramid translation for exposure correction",
               "hipyr"};
  app.require_subcommand(1);

  DecomposeArgs dec;
  auto* decompose = app.add_subcommand("decompose", "Export the pyramid bands of an image");
  decompose->add_option("--input", dec.input, "Input image")->required();
  decompose->add_option("--kernel", dec.kernel, "Kernel file or 'gaussian'")->required();
  decompose->add_option("--out-dir", dec.out_dir, "Output directory")->required();
  decompose->add_option("--levels", dec.levels, "Pyramid levels")->check(CLI::Range(2, 5));

  PredictArgs pk;
  auto* predict = app.add_subcommand("predict-kernel", "Write the hypernet kernel for an image");
  predict->add_option("--input", pk.input, "Input image")->required();
  predict->add_option("--checkpoint", pk.checkpoint, "Checkpoint file")->required();
  predict->add_option("--out", pk.out, "Kernel file to write")->required();

  EnhanceArgs en;
  auto* enhance = app.add_subcommand("enhance", "Enhance an image or a directory of images");
  enhance->add_option("--input", en.input, "Image file or directory")->required();
  enhance->add_option("--checkpoint", en.checkpoint, "Checkpoint file")->required();
  enhance->add_option("--out", en.out, "Output directory")->required();

  TrainArgs tr;
  auto* train = app.add_subcommand("train", "Train from a JSON config");
  train->add_option("--config", tr.config, "Config file")->required();
  train->add_option("--data", tr.data, "SICE-layout dataset root");
  train->add_option("--synthetic", tr.synthetic, "Train on N synthetic pairs instead");
  train->add_option("--out", tr.out, "Run directory (checkpoints, logs)");

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  eval->add_option("--checkpoint", ev.checkpoint, "Checkpoint file")->required();
  eval->add_option("--split", ev.split, "test | grad | mix")
      ->check(CLI::IsMember({"test", "grad", "mix"}));
  eval->add_option("--data", ev.data, "SICE-layout dataset root")->required();
  eval->add_option("--panels", ev.panels, "Panels for grad/mix (default: frame count)");
  eval->add_option("--seed", ev.seed, "Permutation seed for mix");
  eval->add_option("--report", ev.report, "Write NDJSON records here instead of stdout");

  GradMixArgs gm;
  auto* gradmix = app.add_subcommand("make-gradmix", "Compose Grad/Mix panel images");
  gradmix->add_option("--root", gm.root, "SICE-layout dataset root")->required();
  gradmix->add_option("--mode", gm.mode, "grad | mix")->check(CLI::IsMember({"grad", "mix"}));
  gradmix->add_option("--panels", gm.panels, "Panel count (default: frame count)");
  gradmix->add_option("--seed", gm.seed, "Permutation seed for mix");
  gradmix->add_option("--out", gm.out, "Output directory")->required();

  if (argc <= 1) {
    err << app.help();
    return 2;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*decompose) return run_decompose(dec, out);
    if (*predict) return run_predict_kernel(pk, out);
    if (*enhance) return run_enhance(en, out);
    if (*train) return run_train(tr, out);
    if (*eval) return run_eval(ev, out);
    if (*gradmix) return run_make_gradmix(gm, out);
  } catch (const std::exception& e) {
    std::string msg = e.what();
    if (auto nl = msg.find('\n'); nl != std::string::npos) msg.resize(nl);
    err << "hipyr: error: " << msg << '\n';
    return 1;
  }
  err << app.help();
  return 2;
}

}  // namespace hipyr::cli
