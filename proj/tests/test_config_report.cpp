// Copyright 2026 The vdit Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "vdit/config.hpp"
#include "vdit/error.hpp"
#include "vdit/report.hpp"

namespace vdit {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("vdit_test_" + name);
  fs::remove_all(p);
  return p;
}

TEST(Config, JsonRoundTrip) {
  auto c = preset_config("quick");
  c.seed = 11;
  c.forward.mode = CondMode::T;
  c.forward.schedule.step = 4;
  const auto back = config_from_json(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
  EXPECT_EQ(config_hash(back), config_hash(c));
}

TEST(Config, PartialJsonStartsFromThePreset) {
  auto c = config_from_json(nlohmann::json{{"preset", "quick"}, {"seed", 3}});
  EXPECT_EQ(c.optim.steps, preset_config("quick").optim.steps);
  EXPECT_EQ(c.seed, 3u);
  EXPECT_EQ(config_from_json(nlohmann::json::object()).preset, "desk");
}

TEST(Config, RejectsUnknownKeysAndPresets) {
  try {
    config_from_json(nlohmann::json{{"optim", {{"learning_rate", 1.0}}}});
    FAIL() << "unknown key accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidArgument);
    EXPECT_EQ(e.subject(), "optim.learning_rate");
  }
  EXPECT_THROW(preset_config("huge"), Error);
  EXPECT_THROW(load_config("/nonexistent/config.json"), Error);
}

TEST(Config, HashTracksEveryField) {
  auto a = preset_config("desk"), b = a;
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 16u);
  b.loss.giou = 2.5;
  EXPECT_NE(config_hash(a), config_hash(b));
  // segmentation-only fields do not touch the pretraining hash
  EXPECT_EQ(pretrain_hash(a), pretrain_hash(b));
  b.pretrain.codec.steps += 1;
  EXPECT_NE(pretrain_hash(a), pretrain_hash(b));
}

TEST(Config, RunId) {
  auto c = preset_config("desk");
  c.forward.schedule.step = 9;
  c.seed = 2;
  const auto id = run_id(c);
  EXPECT_EQ(id, "it-attention-predicted-t10-seed2-" + config_hash(c).substr(0, 8));
}

TEST(Config, LoadFromFile) {
  const auto dir = scratch("config");
  fs::create_directories(dir);
  std::ofstream(dir / "c.json") << R"({"preset": "quick", "forward": {"fusion": "concat"}})";
  EXPECT_EQ(load_config(dir / "c.json").forward.fusion, Fusion::Concat);
  std::ofstream(dir / "bad.json") << "{ not json";
  EXPECT_THROW(load_config(dir / "bad.json"), Error);
  fs::remove_all(dir);
}

TEST(Csv, FixedNumberFormat) {
  EXPECT_EQ(format_number(0.5), "0.5");
  EXPECT_EQ(format_number(1.0 / 3.0), "0.3333333333");
  EXPECT_EQ(format_number(12345678901.0), "1.23456789e+10");
  EXPECT_EQ(format_number(std::numeric_limits<double>::quiet_NaN()), "nan");
}

TEST(Csv, WriteAndRead) {
  const auto dir = scratch("csv");
  {
    CsvWriter w(dir / "sub" / "t.csv", {"name", "a", "b"});
    w.row({"x"}, {1.0, 0.25});
    w.row({"y"}, {2.0, -3.0});
    EXPECT_THROW(w.row({"z"}, {1.0}), Error);
  }
  const auto t = read_csv(dir / "sub" / "t.csv");
  EXPECT_EQ(t.header, (std::vector<std::string>{"name", "a", "b"}));
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[1], (std::vector<std::string>{"y", "2", "-3"}));
  EXPECT_THROW(read_csv(dir / "missing.csv"), Error);
  fs::remove_all(dir);
}

TEST(Json, RoundTrip) {
  const auto dir = scratch("json");
  write_json(dir / "s.json", {{"jf", 0.5}, {"rows", {1, 2}}});
  EXPECT_EQ(read_json(dir / "s.json")["rows"][1], 2);
  fs::remove_all(dir);
}

TEST(Plots, WritePngs) {
  const auto dir = scratch("plot");
  plot_lines(dir / "p.png", "loss", "step", "value", {{"a", {0, 1, 2}, {3, 1, 2}}, {"b", {0, 2}, {1, 1}}});
  save_label_strip(dir / "l.png", torch::randint(0, 4, {3, 4, 4}, torch::kInt64), 4);
  EXPECT_GT(fs::file_size(dir / "p.png"), 0u);
  EXPECT_GT(fs::file_size(dir / "l.png"), 0u);
  fs::remove_all(dir);
}

}  // namespace
}  // namespace vdit
