// Copyright 2026 The vdit Authors
// SPDX-License-Identifier: Apache-2.0

#include "vdit/synth_data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include <json.hpp>
#include <opencv2/imgcodecs.hpp>

#include "vdit/error.hpp"

namespace vdit {

namespace fs = std::filesystem;

Rgb palette_color(int color) {
  static constexpr std::array<Rgb, 8> kPalette = {{
      {0.90f, 0.10f, 0.10f},  // red
      {0.10f, 0.80f, 0.10f},  // green
      {0.15f, 0.25f, 0.95f},  // blue
      {0.95f, 0.90f, 0.10f},  // yellow
      {0.10f, 0.85f, 0.90f},  // cyan
      {0.85f, 0.10f, 0.85f},  // magenta
      {1.00f, 0.55f, 0.00f},  // orange
      {0.95f, 0.95f, 0.95f},  // white
  }};
  VDIT_REQUIRE(color >= 0 && color < 8, ErrorKind::InvalidArgument, std::to_string(color),
               "palette index out of range");
  return kPalette[static_cast<std::size_t>(color)];
}

std::string_view shape_name(ShapeKind s) { return kShapeNames[static_cast<std::size_t>(s)]; }
std::string_view motion_word(Motion m) { return kMotionWords[static_cast<std::size_t>(m)]; }

ShapeKind parse_shape(std::string_view name) {
  for (std::size_t i = 0; i < kShapeNames.size(); ++i)
    if (kShapeNames[i] == name) return static_cast<ShapeKind>(i);
  throw Error(ErrorKind::InvalidArgument, std::string(name), "unknown shape");
}

Motion parse_motion(std::string_view word) {
  for (std::size_t i = 0; i < kMotionWords.size(); ++i)
    if (kMotionWords[i] == word) return static_cast<Motion>(i);
  throw Error(ErrorKind::InvalidArgument, std::string(word), "unknown motion");
}

int parse_color(std::string_view name) {
  for (std::size_t i = 0; i < kColorNames.size(); ++i)
    if (kColorNames[i] == name) return static_cast<int>(i);
  throw Error(ErrorKind::InvalidArgument, std::string(name), "unknown color");
}

namespace {

double reflect(double x, double lo, double hi) {
  const double span = hi - lo;
  if (span <= 0) return lo;
  double u = std::fmod(x - lo, 2 * span);
  if (u < 0) u += 2 * span;
  if (u > span) u = 2 * span - u;
  return lo + u;
}

}  // namespace

std::array<double, 2> object_center(const ObjectSpec& obj, int t, int height, int width) {
  const double d = obj.speed * t;
  switch (obj.motion) {
    case Motion::Left: return {obj.start_x - d, obj.start_y};
    case Motion::Right: return {obj.start_x + d, obj.start_y};
    case Motion::Up: return {obj.start_x, obj.start_y - d};
    case Motion::Down: return {obj.start_x, obj.start_y + d};
    case Motion::Bounce: {
      const double step = d / std::sqrt(2.0);
      const double s = obj.size;
      return {reflect(obj.start_x + step, s, width - s), reflect(obj.start_y + step, s, height - s)};
    }
  }
  return {obj.start_x, obj.start_y};
}

bool shape_contains(const ObjectSpec& obj, double cx, double cy, double px, double py) {
  const double s = obj.size;
  const double dx = px - cx;
  const double dy = py - cy;
  switch (obj.shape) {
    case ShapeKind::Circle: return dx * dx + dy * dy <= s * s;
    case ShapeKind::Square: return std::abs(dx) <= s && std::abs(dy) <= s;
    case ShapeKind::Triangle: {
      // apex up: (0,-s), (-s,s), (s,s)
      if (dy > s) return false;
      // left edge from (-s,s) to (0,-s): points right of it satisfy 2x + y >= -s
      // right edge from (0,-s) to (s,s): 2x - y <= s
      return 2 * dx + dy >= -s && 2 * dx - dy <= s;
    }
  }
  return false;
}

std::string make_expression(const ObjectSpec& referent) {
  return "the " + std::string(kColorNames[static_cast<std::size_t>(referent.color)]) + " " +
         std::string(shape_name(referent.shape)) + " moving " +
         std::string(motion_word(referent.motion));
}

namespace {

void place_object(ObjectSpec& obj, int frames, int height, int width, std::mt19937_64& rng) {
  const double scale = std::min(height, width) / 64.0;
  obj.size = static_cast<int>(std::lround(std::uniform_int_distribution<int>(6, 9)(rng) * scale));
  obj.speed = std::uniform_real_distribution<double>(1.5, 2.5)(rng) * scale;
  const double s = obj.size;
  const double travel_room_x = width - 2 * s - 1;
  const double travel_room_y = height - 2 * s - 1;
  auto uni = [&](double lo, double hi) {
    return hi <= lo ? lo : std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  const int steps = std::max(1, frames - 1);
  switch (obj.motion) {
    case Motion::Left:
    case Motion::Right: {
      obj.speed = std::min(obj.speed, travel_room_x / steps);
      const double travel = obj.speed * steps;
      obj.start_x = obj.motion == Motion::Left ? uni(s + travel, width - s) : uni(s, width - s - travel);
      obj.start_y = uni(s, height - s);
      break;
    }
    case Motion::Up:
    case Motion::Down: {
      obj.speed = std::min(obj.speed, travel_room_y / steps);
      const double travel = obj.speed * steps;
      obj.start_y = obj.motion == Motion::Up ? uni(s + travel, height - s) : uni(s, height - s - travel);
      obj.start_x = uni(s, width - s);
      break;
    }
    case Motion::Bounce:
      obj.start_x = uni(s, width - s);
      obj.start_y = uni(s, height - s);
      break;
  }
}

ObjectSpec random_attributes(std::mt19937_64& rng) {
  ObjectSpec o;
  o.color = std::uniform_int_distribution<int>(0, 7)(rng);
  o.shape = static_cast<ShapeKind>(std::uniform_int_distribution<int>(0, 2)(rng));
  o.motion = static_cast<Motion>(std::uniform_int_distribution<int>(0, 4)(rng));
  return o;
}

bool distractor_ok(const ObjectSpec& d, const ObjectSpec& ref, bool allow_motion_only) {
  if (d.same_triple(ref)) return false;
  if (!allow_motion_only && d.color == ref.color && d.shape == ref.shape) return false;
  return true;
}

bool scene_ok(const SceneSpec& spec) {
  const auto& ref = spec.objects[static_cast<std::size_t>(spec.referent_index)];
  bool has_related = false;
  for (int i = 0; i < spec.num_objects; ++i) {
    if (i == spec.referent_index) continue;
    const auto& d = spec.objects[static_cast<std::size_t>(i)];
    if (!distractor_ok(d, ref, spec.allow_motion_only_distractors)) return false;
    has_related = has_related || d.shared_attributes(ref) >= 1;
  }
  return has_related;
}

}  // namespace

SceneSpec resolve_scene(SceneSpec spec) {
  VDIT_REQUIRE(spec.height > 0 && spec.width > 0 && spec.height % 32 == 0 && spec.width % 32 == 0,
               ErrorKind::InvalidArgument,
               std::to_string(spec.height) + "x" + std::to_string(spec.width),
               "resolution must be divisible by 32");
  VDIT_REQUIRE(spec.frame_count >= 2, ErrorKind::InvalidArgument, std::to_string(spec.frame_count),
               "frame_count must be >= 2");
  VDIT_REQUIRE(spec.num_objects >= 2 && spec.num_objects <= 6, ErrorKind::InvalidArgument,
               std::to_string(spec.num_objects),
               "num_objects must be in [2, 6] (a distractor is required)");

  std::mt19937_64 rng(spec.seed);
  if (spec.objects.empty()) {
    spec.referent_index = std::uniform_int_distribution<int>(0, spec.num_objects - 1)(rng);
    const ObjectSpec ref = random_attributes(rng);
    spec.objects.resize(static_cast<std::size_t>(spec.num_objects));
    bool first_distractor = true;
    for (int i = 0; i < spec.num_objects; ++i) {
      auto& o = spec.objects[static_cast<std::size_t>(i)];
      if (i == spec.referent_index) {
        o = ref;
      } else if (first_distractor) {
        // hard distractor: shares exactly one of color / shape
        o = random_attributes(rng);
        if (std::uniform_int_distribution<int>(0, 1)(rng) == 0) {
          o.color = ref.color;
          if (o.shape == ref.shape) o.shape = static_cast<ShapeKind>((static_cast<int>(ref.shape) + 1) % 3);
        } else {
          o.shape = ref.shape;
          if (o.color == ref.color) o.color = (ref.color + 1) % 8;
        }
        first_distractor = false;
      } else {
        do {
          o = random_attributes(rng);
        } while (!distractor_ok(o, ref, spec.allow_motion_only_distractors));
      }
      place_object(o, spec.frame_count, spec.height, spec.width, rng);
    }
  }
  VDIT_REQUIRE(static_cast<int>(spec.objects.size()) == spec.num_objects, ErrorKind::CountMismatch,
               "objects", "objects list length differs from num_objects");
  VDIT_REQUIRE(spec.referent_index >= 0 && spec.referent_index < spec.num_objects,
               ErrorKind::InvalidArgument, std::to_string(spec.referent_index),
               "referent_index out of range");

  int attempts = 0;
  while (!scene_ok(spec)) {
    VDIT_REQUIRE(++attempts <= 100, ErrorKind::InvalidArgument, "objects",
                 "could not make the referent's attribute triple unique");
    const auto& ref = spec.objects[static_cast<std::size_t>(spec.referent_index)];
    bool related = false;
    for (int i = 0; i < spec.num_objects; ++i) {
      if (i == spec.referent_index) continue;
      auto& d = spec.objects[static_cast<std::size_t>(i)];
      if (!distractor_ok(d, ref, spec.allow_motion_only_distractors)) {
        const ObjectSpec fresh = random_attributes(rng);
        d.color = fresh.color;
        d.shape = fresh.shape;
      }
      related = related || d.shared_attributes(ref) >= 1;
    }
    if (!related) {
      const int idx = spec.referent_index == 0 ? 1 : 0;
      spec.objects[static_cast<std::size_t>(idx)].color = ref.color;
    }
  }
  return spec;
}

RenderedSample generate_scene(const SceneSpec& input) {
  const SceneSpec spec = resolve_scene(input);
  const int T = spec.frame_count;
  const int H = spec.height;
  const int W = spec.width;

  auto frames = torch::empty({T, 3, H, W}, torch::kFloat32);
  auto masks = torch::zeros({T, H, W}, torch::kUInt8);
  auto boxes = torch::zeros({T, 4}, torch::kFloat32);
  auto f = frames.accessor<float, 4>();
  auto m = masks.accessor<std::uint8_t, 3>();

  std::vector<int> order;
  for (int i = 0; i < spec.num_objects; ++i)
    if (i != spec.referent_index) order.push_back(i);
  order.push_back(spec.referent_index);

  RenderedSample out;
  out.valid.assign(static_cast<std::size_t>(T), false);
  for (int t = 0; t < T; ++t) {
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) {
        f[t][0][y][x] = kBackground.r;
        f[t][1][y][x] = kBackground.g;
        f[t][2][y][x] = kBackground.b;
      }
    for (int idx : order) {
      const auto& obj = spec.objects[static_cast<std::size_t>(idx)];
      const auto [cx, cy] = object_center(obj, t, H, W);
      const Rgb c = palette_color(obj.color);
      const bool is_ref = idx == spec.referent_index;
      const int x0 = std::max(0, static_cast<int>(std::floor(cx - obj.size - 1)));
      const int x1 = std::min(W - 1, static_cast<int>(std::ceil(cx + obj.size + 1)));
      const int y0 = std::max(0, static_cast<int>(std::floor(cy - obj.size - 1)));
      const int y1 = std::min(H - 1, static_cast<int>(std::ceil(cy + obj.size + 1)));
      for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) {
          if (!shape_contains(obj, cx, cy, x + 0.5, y + 0.5)) continue;
          f[t][0][y][x] = c.r;
          f[t][1][y][x] = c.g;
          f[t][2][y][x] = c.b;
          if (is_ref) m[t][y][x] = 1;
        }
    }
    if (auto box = mask_box(masks[t])) {
      out.valid[static_cast<std::size_t>(t)] = true;
      for (int k = 0; k < 4; ++k) boxes[t][k] = (*box)[static_cast<std::size_t>(k)];
    }
  }
  out.frames = frames;
  out.gt_masks = masks;
  out.gt_boxes = boxes;
  out.referent = spec.objects[static_cast<std::size_t>(spec.referent_index)];
  out.expression = make_expression(out.referent);
  return out;
}

std::optional<std::array<float, 4>> mask_box(const torch::Tensor& mask) {
  const auto mc = mask.to(torch::kUInt8).contiguous();
  const auto a = mc.accessor<std::uint8_t, 2>();
  int x1 = INT32_MAX, y1 = INT32_MAX, x2 = -1, y2 = -1;
  for (int y = 0; y < a.size(0); ++y)
    for (int x = 0; x < a.size(1); ++x)
      if (a[y][x]) {
        x1 = std::min(x1, x);
        y1 = std::min(y1, y);
        x2 = std::max(x2, x);
        y2 = std::max(y2, y);
      }
  if (x2 < 0) return std::nullopt;
  return std::array<float, 4>{float(x1), float(y1), float(x2 + 1), float(y2 + 1)};
}

torch::Tensor perturb_brightness(const torch::Tensor& frames, const std::vector<int>& frame_indices,
                                 const std::vector<double>& factors) {
  VDIT_REQUIRE(frame_indices.size() == factors.size(), ErrorKind::CountMismatch, "factors",
               "one factor per frame index required");
  auto out = frames.clone();
  const auto T = frames.size(0);
  for (std::size_t i = 0; i < factors.size(); ++i) {
    const double factor = factors[i];
    VDIT_REQUIRE(factor > 0 && factor <= 2, ErrorKind::InvalidArgument, std::to_string(factor),
                 "brightness factor must be in (0, 2]");
    const int t = frame_indices[i];
    VDIT_REQUIRE(t >= 0 && t < T, ErrorKind::InvalidArgument, std::to_string(t),
                 "frame index out of range");
    out[t] = torch::clamp(frames[t] * factor, 0.0, 1.0);
  }
  return out;
}

std::uint64_t scene_seed(const DataConfig& cfg, Split split, int index) {
  const std::uint64_t split_offset = split == Split::Train ? 0 : 10'000'000ULL;
  return cfg.seed * 1'000'003ULL + split_offset + static_cast<std::uint64_t>(index);
}

std::vector<RenderedSample> make_dataset(const DataConfig& cfg, Split split) {
  const int n = split == Split::Train ? cfg.train_videos : cfg.eval_videos;
  std::vector<RenderedSample> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    SceneSpec spec;
    spec.seed = scene_seed(cfg, split, i);
    std::mt19937_64 count_rng(spec.seed ^ 0x9E3779B97F4A7C15ULL);
    spec.num_objects =
        std::uniform_int_distribution<int>(cfg.min_objects, cfg.max_objects)(count_rng);
    spec.frame_count = cfg.frame_count;
    spec.height = cfg.height;
    spec.width = cfg.width;
    spec.allow_motion_only_distractors = cfg.allow_motion_only_distractors;
    out.push_back(generate_scene(spec));
  }
  return out;
}

namespace {

std::string frame_name(int t) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%05d.png", t);
  return buf;
}

std::vector<fs::path> sorted_pngs(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".png") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  return files;
}

nlohmann::json load_expressions(const fs::path& file) {
  std::ifstream in(file);
  VDIT_REQUIRE(in.good(), ErrorKind::MissingFile, file.string(), "cannot open expressions file");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Io, file.string(), e.what());
  }
}

}  // namespace

void write_davis(const RenderedSample& sample, const fs::path& root, const std::string& video) {
  const fs::path img_dir = root / "JPEGImages" / video;
  const fs::path ann_dir = root / "Annotations" / video;
  fs::create_directories(img_dir);
  fs::create_directories(ann_dir);

  const int T = sample.frame_count();
  const int H = sample.height();
  const int W = sample.width();
  const auto q = (sample.frames * 255.0).round().clamp(0, 255).to(torch::kUInt8).contiguous();
  const auto fa = q.accessor<std::uint8_t, 4>();
  const auto mc = sample.gt_masks.contiguous();
  const auto ma = mc.accessor<std::uint8_t, 3>();
  for (int t = 0; t < T; ++t) {
    cv::Mat img(H, W, CV_8UC3);
    cv::Mat mask(H, W, CV_8UC1);
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) {
        img.at<cv::Vec3b>(y, x) = cv::Vec3b(fa[t][2][y][x], fa[t][1][y][x], fa[t][0][y][x]);
        mask.at<std::uint8_t>(y, x) = ma[t][y][x] ? 255 : 0;
      }
    const auto img_path = img_dir / frame_name(t);
    const auto ann_path = ann_dir / frame_name(t);
    VDIT_REQUIRE(cv::imwrite(img_path.string(), img), ErrorKind::Io, img_path.string(),
                 "failed to write frame");
    VDIT_REQUIRE(cv::imwrite(ann_path.string(), mask), ErrorKind::Io, ann_path.string(),
                 "failed to write mask");
  }

  const fs::path expr_file = root / "expressions.json";
  nlohmann::json doc = fs::exists(expr_file) ? load_expressions(expr_file) : nlohmann::json::object();
  doc["videos"][video] = {
      {"expression", sample.expression},
      {"color", std::string(kColorNames[static_cast<std::size_t>(sample.referent.color)])},
      {"shape", std::string(shape_name(sample.referent.shape))},
      {"motion", std::string(motion_word(sample.referent.motion))},
  };
  std::ofstream out(expr_file);
  VDIT_REQUIRE(out.good(), ErrorKind::Io, expr_file.string(), "cannot write expressions file");
  out << doc.dump(2) << "\n";
}

RenderedSample read_davis(const fs::path& root, const std::string& video) {
  const fs::path expr_file = root / "expressions.json";
  VDIT_REQUIRE(fs::exists(expr_file), ErrorKind::MissingFile, expr_file.string(),
               "expressions file not found");
  const auto doc = load_expressions(expr_file);
  VDIT_REQUIRE(doc.contains("videos") && doc["videos"].contains(video), ErrorKind::MissingFile,
               expr_file.string() + ":" + video, "no expression entry for video");
  const auto& entry = doc["videos"][video];

  const fs::path img_dir = root / "JPEGImages" / video;
  const fs::path ann_dir = root / "Annotations" / video;
  VDIT_REQUIRE(fs::is_directory(img_dir), ErrorKind::MissingFile, img_dir.string(),
               "frame directory not found");
  VDIT_REQUIRE(fs::is_directory(ann_dir), ErrorKind::MissingFile, ann_dir.string(),
               "annotation directory not found");
  const auto frames = sorted_pngs(img_dir);
  const auto masks = sorted_pngs(ann_dir);
  VDIT_REQUIRE(!frames.empty(), ErrorKind::MissingFile, img_dir.string(), "no frames");
  VDIT_REQUIRE(frames.size() == masks.size(), ErrorKind::CountMismatch, ann_dir.string(),
               std::to_string(frames.size()) + " frames but " + std::to_string(masks.size()) +
                   " masks");

  const int T = static_cast<int>(frames.size());
  cv::Mat first = cv::imread(frames[0].string(), cv::IMREAD_COLOR);
  VDIT_REQUIRE(!first.empty(), ErrorKind::Io, frames[0].string(), "unreadable frame");
  const int H = first.rows;
  const int W = first.cols;

  RenderedSample s;
  s.frames = torch::empty({T, 3, H, W}, torch::kFloat32);
  s.gt_masks = torch::zeros({T, H, W}, torch::kUInt8);
  s.gt_boxes = torch::zeros({T, 4}, torch::kFloat32);
  s.valid.assign(static_cast<std::size_t>(T), false);
  auto fa = s.frames.accessor<float, 4>();
  auto ma = s.gt_masks.accessor<std::uint8_t, 3>();
  for (int t = 0; t < T; ++t) {
    const auto& fp = frames[static_cast<std::size_t>(t)];
    const auto& mp = masks[static_cast<std::size_t>(t)];
    cv::Mat img = cv::imread(fp.string(), cv::IMREAD_COLOR);
    cv::Mat mask = cv::imread(mp.string(), cv::IMREAD_GRAYSCALE);
    VDIT_REQUIRE(!img.empty(), ErrorKind::Io, fp.string(), "unreadable frame");
    VDIT_REQUIRE(!mask.empty(), ErrorKind::Io, mp.string(), "unreadable mask");
    VDIT_REQUIRE(img.rows == H && img.cols == W && mask.rows == H && mask.cols == W,
                 ErrorKind::ShapeMismatch, mp.string(), "frame/mask size differs from first frame");
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) {
        const auto px = img.at<cv::Vec3b>(y, x);
        fa[t][0][y][x] = px[2] / 255.0f;
        fa[t][1][y][x] = px[1] / 255.0f;
        fa[t][2][y][x] = px[0] / 255.0f;
        ma[t][y][x] = mask.at<std::uint8_t>(y, x) > 127 ? 1 : 0;
      }
    if (auto box = mask_box(s.gt_masks[t])) {
      s.valid[static_cast<std::size_t>(t)] = true;
      for (int k = 0; k < 4; ++k) s.gt_boxes[t][k] = (*box)[static_cast<std::size_t>(k)];
    }
  }
  s.expression = entry.at("expression").get<std::string>();
  s.referent.color = parse_color(entry.at("color").get<std::string>());
  s.referent.shape = parse_shape(entry.at("shape").get<std::string>());
  s.referent.motion = parse_motion(entry.at("motion").get<std::string>());
  return s;
}

std::vector<std::string> list_davis_videos(const fs::path& root) {
  const auto doc = load_expressions(root / "expressions.json");
  std::vector<std::string> names;
  if (doc.contains("videos"))
    for (const auto& [k, v] : doc["videos"].items()) names.push_back(k);
  std::sort(names.begin(), names.end());
  return names;
}

}  // namespace vdit
