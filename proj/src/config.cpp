// Copyright 2026 The vdit Authors
// SPDX-License-Identifier: Apache-2.0

#include "vdit/config.hpp"

#include <cstdio>
#include <fstream>

#include "vdit/error.hpp"

namespace vdit {

NLOHMANN_JSON_SERIALIZE_ENUM(CondMode, {{CondMode::IT, "IT"}, {CondMode::I, "I"}, {CondMode::T, "T"}})
NLOHMANN_JSON_SERIALIZE_ENUM(Fusion, {{Fusion::Attention, "attention"}, {Fusion::Concat, "concat"}})
NLOHMANN_JSON_SERIALIZE_ENUM(NoiseKind, {{NoiseKind::Predicted, "predicted"}, {NoiseKind::Gaussian, "gaussian"}})
NLOHMANN_JSON_SERIALIZE_ENUM(BlendConvention,
                             {{BlendConvention::Literal, "literal"}, {BlendConvention::Sqrt, "sqrt"}})

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(DataConfig, train_videos, eval_videos, frame_count, height, width, min_objects,
                                   max_objects, allow_motion_only_distractors, seed)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(CodecConfig, stage1_channels, tap_channels, stage3_channels, decoder_channels)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(EncoderConfig, width, heads, depth, max_tokens, patch, max_patches)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(UNetConfig, in_channels, base_channels, level_channels, attention_heads,
                                   temporal_attention, max_frames, context_dim, time_embed_dim, groups)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(MaskHeadConfig, queries, d_model, heads, encoder_layers, decoder_layers, ffn_dim,
                                   text_dim, level_channels, dynamic_channels, refine_channels, text_positions,
                                   max_text_tokens)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ModelConfig, codec, encoder, unet, head)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ScheduleConfig, num_steps, beta_start, beta_end, step, convention)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ForwardConfig, mode, fusion, noise, schedule)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(LossWeights, mask_lowres, mask, box, score, dice, mask_focal, l1, giou,
                                   score_focal)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(OptimConfig, steps, lr, weight_decay, grad_clip, lr_drop_step, text_encoder_lr,
                                   backbone_lr)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(CodecPretrainConfig, steps, lr, frames_per_step)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(T2VPretrainConfig, steps, lr, image_cond_prob, word_loss_weight, val_videos)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(PretrainConfig, seed, codec, t2v)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(EvalConfig, eval_every, snapshot_videos)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(AnalysisConfig, kmeans_k, kmeans_level, kmeans_videos, roi_level, lighting_levels,
                                   lighting_videos)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ExperimentConfig, preset, data, model, forward, loss, optim, pretrain, eval,
                                   analysis, seed)

std::vector<std::string> preset_names() { return {"desk", "quick", "paper-scale"}; }

ExperimentConfig preset_config(const std::string& name) {
  ExperimentConfig c;
  c.preset = name;
  if (name == "desk" || name == "quick") {
    // desk and quick share data and pretraining, so one generative stack serves both
    c.data.train_videos = 1000;
    c.loss.score = 3.0;
    c.optim.steps = name == "desk" ? 7000 : 1200;
    c.optim.lr_drop_step = name == "desk" ? 5600 : -1;
    return c;
  }
  if (name == "paper-scale") {
    // Full-scale reference schedule (A100 cluster); documentation only.
    c.data.frame_count = 5;
    c.data.height = 384;
    c.data.width = 640;
    c.data.train_videos = 3471;
    c.model.head.d_model = 256;
    c.model.head.heads = 8;
    c.model.head.encoder_layers = 4;
    c.model.head.decoder_layers = 4;
    c.model.head.ffn_dim = 2048;
    c.optim.lr = 2.5e-5;
    c.optim.text_encoder_lr = 2.5e-6;
    c.optim.backbone_lr = 2.5e-5;
    c.optim.weight_decay = 5e-4;
    return c;
  }
  throw Error(ErrorKind::InvalidArgument, name, "unknown preset");
}

nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json j = c;
  return j;
}

namespace {

void reject_unknown(const nlohmann::json& given, const nlohmann::json& known, const std::string& path) {
  if (!given.is_object()) return;
  for (const auto& [key, value] : given.items()) {
    const std::string here = path.empty() ? key : path + "." + key;
    VDIT_REQUIRE(known.is_object() && known.contains(key), ErrorKind::InvalidArgument, here, "unknown config key");
    reject_unknown(value, known.at(key), here);
  }
}

}  // namespace

ExperimentConfig config_from_json(const nlohmann::json& j) {
  VDIT_REQUIRE(j.is_object(), ErrorKind::InvalidArgument, "config", "config must be a JSON object");
  const std::string preset = j.value("preset", std::string("desk"));
  auto base = to_json(preset_config(preset));
  reject_unknown(j, base, "");
  base.merge_patch(j);
  try {
    return base.get<ExperimentConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, "config", e.what());
  }
}

ExperimentConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  VDIT_REQUIRE(in.good(), ErrorKind::MissingFile, file.string(), "cannot open config");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, file.string(), e.what());
  }
  return config_from_json(j);
}

namespace {

std::string fnv_hex(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

std::string config_hash(const ExperimentConfig& c) { return fnv_hex(to_json(c).dump()); }

std::string pretrain_hash(const ExperimentConfig& c) {
  nlohmann::json j;
  j["data"] = c.data;
  j["codec"] = c.model.codec;
  j["encoder"] = c.model.encoder;
  j["unet"] = c.model.unet;
  j["pretrain"] = c.pretrain;
  j["schedule"] = {{"num_steps", c.forward.schedule.num_steps},
                   {"beta_start", c.forward.schedule.beta_start},
                   {"beta_end", c.forward.schedule.beta_end}};
  return fnv_hex(j.dump());
}

std::string run_id(const ExperimentConfig& c) {
  std::string mode(to_string(c.forward.mode));
  for (auto& ch : mode) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return mode + "-" + std::string(to_string(c.forward.fusion)) + "-" + std::string(to_string(c.forward.noise)) +
         "-t" + std::to_string(c.forward.schedule.step + 1) + "-seed" + std::to_string(c.seed) + "-" +
         config_hash(c).substr(0, 8);
}

}  // namespace vdit
