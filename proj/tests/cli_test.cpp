// Copyright 2026 The MINR Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "minr/cli.hpp"
#include "minr/image.hpp"
#include "minr/training.hpp"
#include "test_util.hpp"

namespace minr {
namespace {

using testing::scratch_dir;
using testing::slurp;
using testing::tiny_config;

struct CliResult {
  int code;
  std::string out, err;
};

CliResult run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

// Trains tiny transinr and mae checkpoints once for the whole suite.
class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = scratch_dir("cli");
    Config cfg = tiny_config();
    std::ofstream(dir_ / "tiny.cfg") << cfg.to_text();
    for (const char* mode : {"transinr", "mae"}) {
      const CliResult r = run({"train", "--config", (dir_ / "tiny.cfg").string(), "--set",
                         std::string("model.mode=") + mode, "--out",
                         (dir_ / mode).string(), "--log-every", "2"});
      ASSERT_EQ(r.code, 0) << r.err;
    }
  }

  static std::string ckpt(const char* mode) {
    return (dir_ / mode / "checkpoint.bin").string();
  }

  static inline std::filesystem::path dir_;
};

TEST_F(CliTest, TrainWritesOutputsAndLogsSeeds) {
  EXPECT_TRUE(std::filesystem::exists(dir_ / "transinr" / "loss.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir_ / "transinr" / "resolved.cfg"));
  EXPECT_EQ(Checkpoint::load(ckpt("transinr")).step, 6u);
  const CliResult r = run({"train", "--config", (dir_ / "tiny.cfg").string(), "--set",
                     "train.steps=2", "--out", (dir_ / "short").string()});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("seeds: data=1 mask=2 init=3"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("model.mode = transinr"), std::string::npos);
}

TEST_F(CliTest, UsageErrorsExitTwo) {
  EXPECT_EQ(run({"fly"}).code, cli::kExitUsage);
  EXPECT_EQ(run({}).code, cli::kExitUsage);
  EXPECT_EQ(run({"train"}).code, cli::kExitUsage);  // --out missing
  EXPECT_EQ(run({"train", "--out", (dir_ / "x").string(), "--set", "model.widht=3"}).code,
            cli::kExitUsage);
  const CliResult bad = run({"train", "--out", (dir_ / "x").string(), "--config",
                       (dir_ / "missing.cfg").string()});
  EXPECT_EQ(bad.code, cli::kExitUsage);
  EXPECT_FALSE(bad.err.empty());
}

TEST_F(CliTest, RuntimeErrorsExitOne) {
  EXPECT_EQ(run({"eval", "--ckpt", (dir_ / "nope.bin").string()}).code, cli::kExitFailure);
  EXPECT_EQ(run({"render", "--ckpt", ckpt("mae"), "--id", "faces_like-0000", "--out",
                 (dir_ / "r.png").string()})
                .code,
            cli::kExitFailure);
}

TEST_F(CliTest, EvalWritesCsv) {
  const auto out = dir_ / "report.csv";
  const CliResult r = run({"eval", "--ckpt", ckpt("transinr"), "--ckpt", ckpt("mae"), "--test",
                     "synth:faces_like", "--test", "synth:scenes_like", "--out",
                     out.string(), "--gallery", (dir_ / "g.png").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = slurp(out);
  // 2 models x 2 domains x 2 strategies x 1 ratio x 2 variants, plus header.
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 17);
  EXPECT_NE(csv.find("transinr,pasted,faces_like,scenes_like,block,0.75,"), std::string::npos);
  const Image g = read_image(dir_ / "g.png");
  EXPECT_EQ(g.width, 4u * 16u);
}

TEST_F(CliTest, ReconstructWritesFourImages) {
  const auto out = dir_ / "recon";
  const CliResult r = run({"reconstruct", "--ckpt", ckpt("transinr"), "--id", "faces_like-0001",
                     "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"masked.png", "reconstruction.png", "pasted.png", "truth.png"})
    EXPECT_EQ(read_image(out / f).height, 16u) << f;
  EXPECT_EQ(run({"reconstruct", "--ckpt", ckpt("transinr"), "--id", "nobody", "--out",
                 out.string()})
                .code,
            cli::kExitFailure);
}

TEST_F(CliTest, RenderAtRequestedSize) {
  const auto out = dir_ / "render.png";
  ASSERT_EQ(run({"render", "--ckpt", ckpt("transinr"), "--id", "faces_like-0001", "--out",
                 out.string()})
                .code,
            0);
  const Image img = read_image(out);
  EXPECT_EQ(img.height, 128u);
  EXPECT_EQ(img.width, 128u);
  ASSERT_EQ(run({"render", "--ckpt", ckpt("transinr"), "--id", "faces_like-0001", "--size",
                 "48x32", "--out", out.string()})
                .code,
            0);
  EXPECT_EQ(read_image(out).width, 32u);
  EXPECT_NE(run({"render", "--ckpt", ckpt("transinr"), "--id", "faces_like-0001", "--size",
                 "big", "--out", out.string()})
                .code,
            0);
}

TEST_F(CliTest, RenderFromImageFile) {
  write_image(dir_ / "in.png", testing::random_image(30, 40, 1));
  ASSERT_EQ(run({"render", "--ckpt", ckpt("transinr"), "--image",
                 (dir_ / "in.png").string(), "--size", "16x16", "--out",
                 (dir_ / "f.png").string()})
                .code,
            0);
}

TEST_F(CliTest, GalleryGrid) {
  const auto out = dir_ / "gallery.png";
  const CliResult r = run({"gallery", "--ckpt", ckpt("transinr"), "--ckpt", ckpt("mae"),
                     "--count", "2", "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const Image g = read_image(out);
  EXPECT_EQ(g.height, 2u * 16u);
  EXPECT_EQ(g.width, 4u * 16u);
}

}  // namespace
}  // namespace minr
