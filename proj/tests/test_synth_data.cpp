// Copyright 2026 The vdit Authors
// SPDX-License-Identifier: Apache-2.0

#include "vdit/synth_data.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <set>

#include "vdit/error.hpp"

namespace vdit {
namespace {

// Paints every pixel from scratch: background, then distractors, then the
// referent on top.
void expect_matches_brute_force(const SceneSpec& input, const RenderedSample& s) {
  const auto spec = resolve_scene(input);
  std::vector<int> order;
  for (int i = 0; i < spec.num_objects; ++i)
    if (i != spec.referent_index) order.push_back(i);
  order.push_back(spec.referent_index);
  for (int t = 0; t < spec.frame_count; ++t) {
    bool any = false;
    for (int y = 0; y < spec.height; ++y)
      for (int x = 0; x < spec.width; ++x) {
        Rgb want = kBackground;
        bool in_ref = false;
        for (int idx : order) {
          const auto& o = spec.objects[static_cast<std::size_t>(idx)];
          const auto c = object_center(o, t, spec.height, spec.width);
          if (!shape_contains(o, c[0], c[1], x + 0.5, y + 0.5)) continue;
          want = palette_color(o.color);
          in_ref = idx == spec.referent_index;
        }
        any = any || in_ref;
        ASSERT_EQ(s.gt_masks[t][y][x].item<int>(), in_ref ? 1 : 0) << t << " " << y << " " << x;
        ASSERT_EQ(s.frames[t][0][y][x].item<float>(), want.r);
        ASSERT_EQ(s.frames[t][1][y][x].item<float>(), want.g);
        ASSERT_EQ(s.frames[t][2][y][x].item<float>(), want.b);
      }
    EXPECT_EQ(s.valid[static_cast<std::size_t>(t)], any);
  }
}

TEST(Rasterizer, MatchesPerPixelMembership) {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    SceneSpec spec;
    spec.seed = seed;
    spec.num_objects = 2 + static_cast<int>(seed % 4);
    spec.frame_count = 4;
    expect_matches_brute_force(spec, generate_scene(spec));
  }
}

TEST(Rasterizer, TriangleHandCase) {
  ObjectSpec o;
  o.shape = ShapeKind::Triangle;
  o.size = 4;
  EXPECT_TRUE(shape_contains(o, 0, 0, 0, -4));   // apex
  EXPECT_TRUE(shape_contains(o, 0, 0, -4, 4));   // base corners
  EXPECT_TRUE(shape_contains(o, 0, 0, 4, 4));
  EXPECT_FALSE(shape_contains(o, 0, 0, 0, 4.01));
  EXPECT_FALSE(shape_contains(o, 0, 0, -2.5, 0));  // left of the edge 2x + y = -4
  EXPECT_TRUE(shape_contains(o, 0, 0, -1.5, 0));
  o.shape = ShapeKind::Circle;
  EXPECT_TRUE(shape_contains(o, 0, 0, 4, 0));
  EXPECT_FALSE(shape_contains(o, 0, 0, 3, 3));
}

TEST(Rasterizer, MotionAndBounce) {
  ObjectSpec o;
  o.motion = Motion::Up;
  o.start_x = 20;
  o.start_y = 30;
  o.speed = 3;
  EXPECT_EQ(object_center(o, 2, 64, 64), (std::array<double, 2>{20, 24}));
  o.motion = Motion::Bounce;
  o.size = 8;
  o.start_x = o.start_y = 50;
  o.speed = 10 * std::sqrt(2.0);
  // 50 + 10 = 60 reflects at 56 to 52
  const auto c = object_center(o, 1, 64, 64);
  EXPECT_NEAR(c[0], 52, 1e-9);
  EXPECT_NEAR(c[1], 52, 1e-9);
}

TEST(Scenes, DeterministicPerSeed) {
  SceneSpec spec;
  spec.seed = 42;
  auto a = generate_scene(spec), b = generate_scene(spec);
  EXPECT_TRUE(torch::equal(a.frames, b.frames));
  EXPECT_TRUE(torch::equal(a.gt_masks, b.gt_masks));
  EXPECT_EQ(a.expression, b.expression);
  spec.seed = 43;
  EXPECT_FALSE(torch::equal(generate_scene(spec).frames, a.frames));
}

TEST(Scenes, ReferentIsUniqueAndHasARelatedDistractor) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    SceneSpec spec;
    spec.seed = seed;
    spec.num_objects = 2 + static_cast<int>(seed % 5);
    const auto r = resolve_scene(spec);
    const auto& ref = r.objects[static_cast<std::size_t>(r.referent_index)];
    int related = 0;
    for (int i = 0; i < r.num_objects; ++i) {
      if (i == r.referent_index) continue;
      const auto& d = r.objects[static_cast<std::size_t>(i)];
      ASSERT_FALSE(d.color == ref.color && d.shape == ref.shape) << seed;
      related += d.shared_attributes(ref) >= 1;
    }
    ASSERT_GE(related, 1) << seed;
  }
}

TEST(Scenes, ExpressionGrammar) {
  ObjectSpec o;
  o.color = 3;
  o.shape = ShapeKind::Square;
  o.motion = Motion::Bounce;
  EXPECT_EQ(make_expression(o), "the yellow square moving around");
  EXPECT_EQ(parse_motion("around"), Motion::Bounce);
  EXPECT_EQ(parse_color("white"), 7);
  EXPECT_THROW(parse_shape("hexagon"), Error);
}

TEST(Scenes, RejectsInvalidSpecs) {
  SceneSpec spec;
  spec.height = 50;
  EXPECT_THROW(generate_scene(spec), Error);
  spec = {};
  spec.num_objects = 1;
  EXPECT_THROW(generate_scene(spec), Error);
  spec = {};
  spec.frame_count = 1;
  EXPECT_THROW(generate_scene(spec), Error);
  // two identical objects cannot be told apart
  spec = {};
  spec.num_objects = 2;
  spec.objects = {ObjectSpec{}, ObjectSpec{}};
  try {
    resolve_scene(spec);
  } catch (const Error& e) {
    ADD_FAILURE() << "the distractor should have been resampled: " << e.what();
  }
}

TEST(Boxes, TightExclusiveBox) {
  auto m = torch::zeros({10, 12}, torch::kUInt8);
  m.narrow(0, 2, 3).narrow(1, 5, 4).fill_(1);
  const auto b = mask_box(m);
  ASSERT_TRUE(b.has_value());
  EXPECT_EQ(*b, (std::array<float, 4>{5, 2, 9, 5}));
  EXPECT_FALSE(mask_box(torch::zeros({4, 4}, torch::kUInt8)).has_value());
}

TEST(Brightness, ScalesListedFramesAndClamps) {
  auto f = torch::full({3, 3, 2, 2}, 0.6f);
  auto g = perturb_brightness(f, {1, 2}, {2.0, 0.5});
  EXPECT_FLOAT_EQ(g[0][0][0][0].item<float>(), 0.6f);
  EXPECT_FLOAT_EQ(g[1][0][0][0].item<float>(), 1.0f);
  EXPECT_FLOAT_EQ(g[2][0][0][0].item<float>(), 0.3f);
  EXPECT_THROW(perturb_brightness(f, {1}, {2.0, 0.5}), Error);
}

TEST(Datasets, SplitsUseDistinctSeeds) {
  DataConfig cfg;
  cfg.train_videos = 4;
  cfg.eval_videos = 3;
  std::set<std::uint64_t> seeds;
  for (int i = 0; i < 4; ++i) seeds.insert(scene_seed(cfg, Split::Train, i));
  for (int i = 0; i < 3; ++i) seeds.insert(scene_seed(cfg, Split::Eval, i));
  EXPECT_EQ(seeds.size(), 7u);
  const auto train = make_dataset(cfg, Split::Train);
  ASSERT_EQ(train.size(), 4u);
  EXPECT_EQ(train[0].frame_count(), cfg.frame_count);
  EXPECT_TRUE(torch::equal(make_dataset(cfg, Split::Train)[3].frames, train[3].frames));
}

TEST(Davis, RoundTrip) {
  const auto root = std::filesystem::temp_directory_path() / "vdit_davis_roundtrip";
  std::filesystem::remove_all(root);
  SceneSpec spec;
  spec.seed = 5;
  spec.frame_count = 3;
  const auto s = generate_scene(spec);
  write_davis(s, root, "clip_b");
  write_davis(generate_scene(SceneSpec{}), root, "clip_a");
  EXPECT_EQ(list_davis_videos(root), (std::vector<std::string>{"clip_a", "clip_b"}));
  const auto r = read_davis(root, "clip_b");
  EXPECT_EQ(r.expression, s.expression);
  EXPECT_TRUE(torch::equal(r.gt_masks, s.gt_masks));
  EXPECT_LE((r.frames - s.frames).abs().max().item<float>(), 0.5f / 255 + 1e-6f);
  EXPECT_EQ(r.valid, s.valid);
  EXPECT_TRUE(r.referent.same_triple(s.referent));
  EXPECT_TRUE(torch::equal(r.gt_boxes, s.gt_boxes));
  EXPECT_THROW(read_davis(root, "missing"), Error);
  std::filesystem::remove_all(root);
}

}  // namespace
}  // namespace vdit
