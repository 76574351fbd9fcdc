// Copyright 2026 The vdit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <torch/torch.h>

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vdit {

enum class ShapeKind { Circle, Square, Triangle };
enum class Motion { Left, Right, Up, Down, Bounce };

inline constexpr std::array<std::string_view, 8> kColorNames = {
    "red", "green", "blue", "yellow", "cyan", "magenta", "orange", "white"};
inline constexpr std::array<std::string_view, 3> kShapeNames = {"circle", "square",
                                                                "triangle"};
// Words used in the expression grammar; "around" spells the bounce motion.
inline constexpr std::array<std::string_view, 5> kMotionWords = {"left", "right", "up",
                                                                 "down", "around"};

struct Rgb {
  float r, g, b;
};
Rgb palette_color(int color);
inline constexpr Rgb kBackground{0.08f, 0.08f, 0.08f};

std::string_view shape_name(ShapeKind s);
std::string_view motion_word(Motion m);
ShapeKind parse_shape(std::string_view name);
Motion parse_motion(std::string_view word);
int parse_color(std::string_view name);

struct ObjectSpec {
  ShapeKind shape = ShapeKind::Circle;
  int color = 0;
  Motion motion = Motion::Left;
  int size = 8;          // half extent (radius) in pixels
  double start_x = 32;   // center at frame 0
  double start_y = 32;
  double speed = 2.0;    // pixels per frame

  bool same_triple(const ObjectSpec& o) const {
    return shape == o.shape && color == o.color && motion == o.motion;
  }
  int shared_attributes(const ObjectSpec& o) const {
    return int(shape == o.shape) + int(color == o.color) + int(motion == o.motion);
  }
};

/// Center of an object at frame t; bounce moves diagonally and reflects at
/// the borders, the other motions are straight lines.
std::array<double, 2> object_center(const ObjectSpec& obj, int t, int height, int width);

/// Exact hard-edged membership test, evaluated at pixel centers.
bool shape_contains(const ObjectSpec& obj, double cx, double cy, double px, double py);

struct SceneSpec {
  std::uint64_t seed = 0;
  int num_objects = 3;
  int frame_count = 8;
  int height = 64;
  int width = 64;
  // Empty means "sample from seed".
  std::vector<ObjectSpec> objects;
  int referent_index = 0;
  // When false, distractors never share both color and shape with the referent.
  bool allow_motion_only_distractors = false;
};

struct RenderedSample {
  torch::Tensor frames;     // [T, 3, H, W] float32 in [0, 1]
  std::string expression;
  torch::Tensor gt_masks;   // [T, H, W] uint8 in {0, 1}
  torch::Tensor gt_boxes;   // [T, 4] float32 (x1, y1, x2, y2), x2/y2 exclusive
  std::vector<bool> valid;  // referent visible in frame t
  ObjectSpec referent;

  int frame_count() const { return static_cast<int>(frames.size(0)); }
  int height() const { return static_cast<int>(frames.size(2)); }
  int width() const { return static_cast<int>(frames.size(3)); }
};

std::string make_expression(const ObjectSpec& referent);

/// Fills in objects (when empty) and validates attribute uniqueness,
/// resampling distractor attributes up to 100 times.
SceneSpec resolve_scene(SceneSpec spec);
RenderedSample generate_scene(const SceneSpec& spec);

/// Tight (x1, y1, x2, y2) box of a [H, W] mask with exclusive max corner;
/// nullopt when the mask is empty.
std::optional<std::array<float, 4>> mask_box(const torch::Tensor& mask);

/// out[t] = clamp(frames[t] * factor, 0, 1) for each listed frame.
torch::Tensor perturb_brightness(const torch::Tensor& frames, const std::vector<int>& frame_indices,
                                 const std::vector<double>& factors);

struct DataConfig {
  int train_videos = 200;
  int eval_videos = 50;
  int frame_count = 8;
  int height = 64;
  int width = 64;
  int min_objects = 2;
  int max_objects = 4;
  bool allow_motion_only_distractors = false;
  std::uint64_t seed = 0;
};

enum class Split { Train, Eval };
std::uint64_t scene_seed(const DataConfig& cfg, Split split, int index);
std::vector<RenderedSample> make_dataset(const DataConfig& cfg, Split split);

// DAVIS-style layout:
//   <root>/JPEGImages/<video>/%05d.png   RGB frames
//   <root>/Annotations/<video>/%05d.png  0/255 masks
//   <root>/expressions.json              video -> {expression, color, shape, motion}
void write_davis(const RenderedSample& sample, const std::filesystem::path& root,
                 const std::string& video);
RenderedSample read_davis(const std::filesystem::path& root, const std::string& video);
std::vector<std::string> list_davis_videos(const std::filesystem::path& root);

}  // namespace vdit
