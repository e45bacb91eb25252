#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "hipyr/image_io.hpp"
#include "hipyr/pyramid_io.hpp"
#include "json.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::initializer_list<std::string> args) {
  std::vector<std::string> storage{"hipyr"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& s : storage) argv.push_back(s.c_str());
  std::ostringstream out, err;
  const int code = hipyr::cli::dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

void write_config(const fs::path& path, int steps) {
  std::ofstream(path) << R"({"max_steps": )" << steps
                      << R"(, "batch_size": 2, "image_size": [32, 32], "base_channels": 8,
                            "disc_layers": 3, "disc_channels": 8})";
}

// One trained checkpoint shared by the tests that need a model.
const fs::path& shared_checkpoint() {
  static test_util::TempDir dir;
  static const fs::path ckpt = [] {
    write_config(dir.path / "cfg.json", 2);
    auto r = run({"train", "--config", (dir.path / "cfg.json").string(), "--synthetic", "2",
                  "--out", (dir.path / "run").string()});
    EXPECT_EQ(r.code, 0) << r.err;
    return dir.path / "run" / "latest.ckpt";
  }();
  return ckpt;
}

}  // namespace

TEST(Cli, NoArgumentsPrintsUsageAndFails) {
  auto r = run({});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("Usage"), std::string::npos);
}

TEST(Cli, HelpSucceeds) {
  auto r = run({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("decompose"), std::string::npos);
  EXPECT_EQ(run({"enhance", "--help"}).code, 0);
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"decompose", "--input", "x.png"}).code, 2);
  EXPECT_EQ(run({"eval", "--checkpoint", "a", "--data", "b", "--split", "train"}).code, 2);
  EXPECT_EQ(run({"decompose", "--input", "x", "--kernel", "gaussian", "--out-dir", "o",
                 "--levels", "9"})
                .code,
            2);
}

TEST(Cli, RuntimeErrorsExitOneAndNameThePath) {
  auto r = run({"decompose", "--input", "/no/such/image.png", "--kernel", "gaussian",
                "--out-dir", "/tmp/unused"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("/no/such/image.png"), std::string::npos);
  EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);
  auto e = run({"enhance", "--input", "/no/in.png", "--checkpoint", "/no/model.ckpt", "--out",
                "/tmp/unused"});
  EXPECT_EQ(e.code, 1);
  EXPECT_NE(e.err.find("/no/in.png"), std::string::npos);
}

TEST(Cli, DecomposeWritesBandsAndSidecar) {
  test_util::TempDir dir;
  hipyr::io::write_png16(dir.path / "in.png", torch::rand({3, 32, 40}));
  std::ofstream(dir.path / "k.txt") << "0 0 0 0 0\n0 0.25 0 0.25 0\n0 0 0 0 0\n0 0.25 0 0.25 0\n0 0 0 0 0\n";
  auto r = run({"decompose", "--input", (dir.path / "in.png").string(), "--kernel",
                (dir.path / "k.txt").string(), "--out-dir", (dir.path / "bands").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"band_0.png", "band_1.png", "band_2.png", "pyramid.txt"})
    EXPECT_TRUE(fs::exists(dir.path / "bands" / f)) << f;
  auto pyr = hipyr::pyramid::import_pyramid(dir.path / "bands");
  EXPECT_EQ(pyr.base().size(1), 8);
  EXPECT_EQ(pyr.base().size(2), 10);
}

TEST(Cli, TrainPredictEnhance) {
  const auto& ckpt = shared_checkpoint();
  ASSERT_TRUE(fs::exists(ckpt));
  EXPECT_TRUE(fs::exists(ckpt.parent_path() / "train_log.ndjson"));

  test_util::TempDir dir;
  hipyr::io::write_png8(dir.path / "in" / "a.png", torch::rand({3, 37, 50}));
  hipyr::io::write_png8(dir.path / "in" / "b.png", torch::rand({3, 20, 24}));

  auto k = run({"predict-kernel", "--input", (dir.path / "in" / "a.png").string(),
                "--checkpoint", ckpt.string(), "--out", (dir.path / "k.txt").string()});
  ASSERT_EQ(k.code, 0) << k.err;
  EXPECT_EQ(hipyr::pyramid::read_kernel(dir.path / "k.txt").sizes(),
            (std::vector<int64_t>{5, 5}));

  auto e = run({"enhance", "--input", (dir.path / "in").string(), "--checkpoint", ckpt.string(),
                "--out", (dir.path / "out").string()});
  ASSERT_EQ(e.code, 0) << e.err;
  auto a = hipyr::io::read_image(dir.path / "out" / "a.png");
  EXPECT_EQ(a.sizes(), (std::vector<int64_t>{3, 37, 50}));
  auto b = hipyr::io::read_image(dir.path / "out" / "b.png");
  EXPECT_EQ(b.sizes(), (std::vector<int64_t>{3, 20, 24}));
}

TEST(Cli, MakeGradMixAndEvaluate) {
  const auto& ckpt = shared_checkpoint();
  test_util::TempDir dir;
  const auto data = dir.path / "sice";
  test_util::write_dataset(data, 10, 3, {32, 48});

  auto g = run({"make-gradmix", "--root", data.string(), "--mode", "mix", "--panels", "3",
                "--seed", "7", "--out", (dir.path / "mix").string()});
  ASSERT_EQ(g.code, 0) << g.err;
  EXPECT_EQ(hipyr::io::list_images(dir.path / "mix" / "degraded").size(), 10u);
  EXPECT_EQ(hipyr::io::list_images(dir.path / "mix" / "labels").size(), 10u);
  EXPECT_TRUE(fs::exists(dir.path / "mix" / "manifest.tsv"));

  const auto report = dir.path / "report.ndjson";
  auto t = run({"eval", "--checkpoint", ckpt.string(), "--split", "grad", "--data", data.string(),
                "--report", report.string()});
  ASSERT_EQ(t.code, 0) << t.err;
  EXPECT_NE(t.out.find("PSNR"), std::string::npos);
  std::ifstream in(report);
  std::string line, last;
  int lines = 0;
  while (std::getline(in, line)) {
    ++lines;
    last = line;
  }
  EXPECT_EQ(lines, 2);  // one test scene + the aggregate
  auto agg = nlohmann::json::parse(last);
  EXPECT_TRUE(agg.at("aggregate").get<bool>());
  EXPECT_EQ(agg.at("count").get<int>(), 1);

  auto s = run({"eval", "--checkpoint", ckpt.string(), "--split", "test", "--data", data.string()});
  ASSERT_EQ(s.code, 0) << s.err;
  EXPECT_NE(s.out.find("\"aggregate\":true"), std::string::npos);
}

TEST(Cli, TrainNeedsADataSource) {
  test_util::TempDir dir;
  write_config(dir.path / "cfg.json", 1);
  auto r = run({"train", "--config", (dir.path / "cfg.json").string()});
  EXPECT_EQ(r.code, 1);
}
