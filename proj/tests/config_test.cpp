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

#include "minr/config.hpp"
#include "minr/error.hpp"
#include "minr/model.hpp"

namespace minr {
namespace {

TEST(ConfigTest, DeskDefaults) {
  const Config c = Config::defaults();
  EXPECT_EQ(c.get_int("data.size"), 64);
  EXPECT_EQ(c.get_int("model.patch"), 8);
  EXPECT_EQ(c.get_string("model.mode"), "transinr");
  EXPECT_DOUBLE_EQ(c.get_double("mask.ratio"), 0.75);
  EXPECT_DOUBLE_EQ(c.get_double("train.lr"), 1e-4);
  EXPECT_FALSE(c.get_bool("mask.fixed"));
  EXPECT_EQ(c.get_list("eval.strategies"), (std::vector<std::string>{"random", "block"}));
  EXPECT_EQ(c.get_int("model.ginr_specific_layer"), 2);
}

TEST(ConfigTest, UnknownKeysAndBadValuesAreConfigErrors) {
  Config c = Config::defaults();
  EXPECT_THROW(c.set("model.widht", "3"), ConfigError);
  EXPECT_THROW(c.set("data.size", "sixty"), ConfigError);
  EXPECT_THROW(c.set("train.lr", "nan"), ConfigError);
  EXPECT_THROW(c.set("mask.fixed", "maybe"), ConfigError);
  EXPECT_THROW(c.apply_override("train.steps"), ConfigError);
  EXPECT_THROW(c.get_int("train.lr"), ConfigError);
}

TEST(ConfigTest, ValuesAreCanonicalized) {
  Config c = Config::defaults();
  c.set("train.lr", " 0.00010 ");
  c.set("mask.fixed", "1");
  EXPECT_EQ(c.entries().at("train.lr").value, "1e-04");
  EXPECT_TRUE(c.get_bool("mask.fixed"));
}

TEST(ConfigTest, TextRoundTrip) {
  Config c = Config::defaults();
  c.apply_override("model.mode=ginr");
  c.apply_override("train.steps = 17");
  Config back = Config::defaults();
  back.load_text(c.to_text());
  EXPECT_EQ(back, c);
  EXPECT_EQ(back.get_int("train.steps"), 17);
}

TEST(ConfigTest, CommentsAndLineNumbers) {
  Config c = Config::defaults();
  c.load_text("# header\n\nmodel.depth = 2  # inline\n", "x.cfg");
  EXPECT_EQ(c.get_int("model.depth"), 2);
  try {
    c.load_text("model.depth = 2\n\nbogus.key = 1\n", "x.cfg");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("x.cfg:3"), std::string::npos) << e.what();
  }
  EXPECT_THROW(c.load_text("just words\n"), ConfigError);
  EXPECT_THROW(c.load_file("/nonexistent/x.cfg"), ConfigError);
}

TEST(ConfigTest, ModelConfigsFollowKeys) {
  Config c = Config::defaults();
  c.set("model.mode", "ginr");
  c.set("model.activation", "sin");
  const HypernetConfig h = hypernet_config(c);
  EXPECT_EQ(h.mode, HeadMode::ginr);
  EXPECT_EQ(h.activation, inr::Activation::sin);
  EXPECT_EQ(h.grid.count(), 64u);
  EXPECT_EQ(h.ginr_layer, 2u);
  c.set("model.mode", "vit");
  EXPECT_THROW(make_model(c), Error);
}

}  // namespace
}  // namespace minr
