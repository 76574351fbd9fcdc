// Copyright 2026 The vdit Authors
// SPDX-License-Identifier: Apache-2.0

#include "vdit/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "vdit/error.hpp"
#include "vdit/feature_analysis.hpp"
#include "vdit/hungarian.hpp"
#include "vdit/log.hpp"

namespace vdit {

namespace {

void check_finite(double loss, double last_finite, const char* phase, int step) {
  if (std::isfinite(loss)) return;
  throw Error(ErrorKind::Divergence, phase,
              "non-finite loss at step " + std::to_string(step) + ", last finite loss " + std::to_string(last_finite));
}

torch::Tensor token_ids(const Vocabulary& vocab, const std::string& expression) {
  return torch::tensor(vocab.tokenize(expression), torch::kInt64);
}

}  // namespace

double reconstruction_psnr(LatentCodec& codec, const std::vector<RenderedSample>& clips) {
  torch::NoGradGuard ng;
  double total = 0;
  int64_t n = 0;
  for (const auto& s : clips) {
    auto rec = codec->decode(codec->encode(s.frames).latents);
    for (int64_t t = 0; t < s.frames.size(0); ++t, ++n) total += psnr(rec[t], s.frames[t]);
  }
  return n ? total / static_cast<double>(n) : 0.0;
}

CodecReport pretrain_codec(LatentCodec& codec, const std::vector<RenderedSample>& train,
                           const std::vector<RenderedSample>& held_out, const CodecPretrainConfig& cfg,
                           std::uint64_t seed) {
  VDIT_REQUIRE(!train.empty(), ErrorKind::InvalidArgument, "train", "no training clips");
  CodecReport rep;
  codec->set_latent_scale(1.0);
  codec->train();
  torch::optim::Adam opt(codec->parameters(), torch::optim::AdamOptions(cfg.lr));
  std::mt19937_64 rng(mix_seed(seed, 11));
  std::uniform_int_distribution<std::size_t> pick_video(0, train.size() - 1);
  double last = 0;
  for (int step = 0; step < cfg.steps; ++step) {
    std::vector<torch::Tensor> frames;
    for (int i = 0; i < cfg.frames_per_step; ++i) {
      const auto& s = train[pick_video(rng)];
      const auto t = std::uniform_int_distribution<int64_t>(0, s.frames.size(0) - 1)(rng);
      frames.push_back(s.frames[t]);
    }
    auto x = torch::stack(frames);
    auto loss = torch::mse_loss(codec->decode_unclamped(codec->encode(x).latents), x);
    opt.zero_grad();
    loss.backward();
    opt.step();
    const double l = loss.item<double>();
    check_finite(l, last, "codec pretraining", step);
    last = l;
    rep.loss.push_back(l);
    if ((step + 1) % 500 == 0) log::info("codec step ", step + 1, " loss ", l);
  }
  codec->eval();
  {
    torch::NoGradGuard ng;
    std::vector<torch::Tensor> lat;
    for (std::size_t i = 0; i < std::min<std::size_t>(train.size(), 50); ++i)
      lat.push_back(codec->encode(train[i].frames).latents);
    const double sd = torch::cat(lat).std().item<double>();
    rep.latent_scale = sd > 0 ? 1.0 / sd : 1.0;
    codec->set_latent_scale(rep.latent_scale);
  }
  rep.psnr = reconstruction_psnr(codec, held_out);
  return rep;
}

namespace {

torch::Tensor caption_prompts(GenerativeStack& stack, const torch::Tensor& ids, int64_t frames) {
  auto p_e = stack->prompt_encoder->forward(ids);
  return p_e.unsqueeze(0).expand({frames, p_e.size(0), p_e.size(1)});
}

}  // namespace

double generator_validation_loss(GenerativeStack& stack, const Vocabulary& vocab,
                                 const std::vector<RenderedSample>& val, const NoiseSchedule& schedule,
                                 std::uint64_t seed) {
  torch::NoGradGuard ng;
  double total = 0;
  const int n = static_cast<int>(val.size());
  for (int i = 0; i < n; ++i) {
    const auto& s = val[static_cast<std::size_t>(i)];
    auto x0 = stack->codec->encode(s.frames).latents;
    const int step = (schedule.num_steps() * (2 * i + 1)) / (2 * n);
    auto eps = gaussian_noise_baseline(x0.sizes(), mix_seed(seed, 5000 + i));
    const auto [a, b] = schedule.blend_coefficients(step, BlendConvention::Sqrt);
    auto prompts = caption_prompts(stack, token_ids(vocab, s.expression), x0.size(0));
    auto pred = stack->unet->forward(blend(x0, eps, a, b), prompts, step).noise_prediction;
    total += torch::mse_loss(pred, eps).item<double>();
  }
  return n ? total / n : 0.0;
}

GeneratorReport pretrain_generator(GenerativeStack& stack, const Vocabulary& vocab,
                                   const std::vector<RenderedSample>& train, const std::vector<RenderedSample>& val,
                                   const T2VPretrainConfig& cfg, const NoiseSchedule& schedule, std::uint64_t seed) {
  VDIT_REQUIRE(!train.empty(), ErrorKind::InvalidArgument, "train", "no training clips");
  GeneratorReport rep;
  rep.val_loss_start = generator_validation_loss(stack, vocab, val, schedule, seed);

  for (auto& p : stack->codec->parameters()) p.set_requires_grad(false);
  stack->codec->eval();
  std::vector<torch::Tensor> params;
  for (auto* m : std::initializer_list<torch::nn::Module*>{stack->unet.get(), stack->prompt_encoder.get(),
                                                           stack->word_encoder.get(), stack->tokenizer.get(),
                                                           stack->image_proj.get(), stack->word_head.get()})
    for (auto& p : m->parameters()) params.push_back(p);
  torch::optim::Adam opt(params, torch::optim::AdamOptions(cfg.lr));

  // Latents never change once the codec is frozen.
  std::vector<torch::Tensor> latents;
  {
    torch::NoGradGuard ng;
    for (const auto& s : train) latents.push_back(stack->codec->encode(s.frames).latents);
  }
  std::mt19937_64 rng(mix_seed(seed, 21));
  std::uniform_int_distribution<std::size_t> pick_video(0, train.size() - 1);
  std::uniform_int_distribution<int> pick_step(0, schedule.num_steps() - 1);
  std::bernoulli_distribution use_image(cfg.image_cond_prob);
  double last = 0;
  for (int step = 0; step < cfg.steps; ++step) {
    const auto v = pick_video(rng);
    const int t = pick_step(rng);
    const bool image = use_image(rng);
    const auto& x0 = latents[v];
    auto eps = gaussian_noise_baseline(x0.sizes(), mix_seed(seed, 100000 + step));
    const auto [a, b] = schedule.blend_coefficients(t, BlendConvention::Sqrt);
    auto ids = token_ids(vocab, train[v].expression);
    torch::Tensor prompts = image ? stack->image_proj(stack->tokenizer->forward(train[v].frames))
                                  : caption_prompts(stack, ids, x0.size(0));
    auto pred = stack->unet->forward(blend(x0, eps, a, b), prompts, t).noise_prediction;
    auto loss = torch::mse_loss(pred, eps);
    auto word_logits = stack->word_head(stack->word_encoder->forward(ids));
    auto total = loss + cfg.word_loss_weight * torch::cross_entropy_loss(word_logits, ids);
    opt.zero_grad();
    total.backward();
    torch::nn::utils::clip_grad_norm_(params, 1.0);
    opt.step();
    const double l = loss.item<double>();
    check_finite(l, last, "generator pretraining", step);
    last = l;
    rep.loss.push_back(l);
    if ((step + 1) % 500 == 0) log::info("generator step ", step + 1, " loss ", l);
  }
  rep.val_loss_end = generator_validation_loss(stack, vocab, val, schedule, seed);
  return rep;
}

Segmenter make_segmenter(const ExperimentConfig& cfg, GenerativeStack& stack) {
  torch::manual_seed(mix_seed(cfg.seed, 1));
  Segmenter seg(cfg.model);
  torch::NoGradGuard ng;
  seg->prompt->image_projection->weight.copy_(stack->image_proj->weight);
  seg->prompt->image_projection->bias.copy_(stack->image_proj->bias);
  return seg;
}

torch::Tensor experiment_noise(const ExperimentConfig& cfg, const SampleFeatures& f, std::uint64_t stream) {
  if (cfg.forward.noise != NoiseKind::Gaussian) return {};
  return gaussian_noise_baseline(f.latents.sizes(), mix_seed(cfg.seed, stream), f.latents.scalar_type());
}

std::vector<std::string> TrainReport::column_names() {
  std::vector<std::string> c{"step", "lr"};
  for (auto& n : LossBreakdown::column_names()) c.push_back(n);
  return c;
}

std::vector<VideoTarget> make_targets(const std::vector<RenderedSample>& samples) {
  std::vector<VideoTarget> t;
  t.reserve(samples.size());
  for (const auto& s : samples) t.push_back(VideoTarget::from_pixels(s.gt_masks, s.gt_boxes, s.valid));
  return t;
}

TrainReport train_segmenter(GenerativeStack& stack, Segmenter& seg, const std::vector<SampleFeatures>& features,
                            const std::vector<VideoTarget>& targets, const ExperimentConfig& cfg,
                            const SnapshotFn& snapshot) {
  VDIT_REQUIRE(!features.empty() && features.size() == targets.size(), ErrorKind::InvalidArgument, "train set",
               "features and targets must be nonempty and aligned");
  TrainReport rep;
  stack->freeze();
  rep.frozen_checksum_before = parameter_checksum(*stack);
  const NoiseSchedule schedule(cfg.forward.schedule);
  seg->train();
  auto params = seg->parameters();
  torch::optim::Adam opt(params, torch::optim::AdamOptions(cfg.optim.lr).weight_decay(cfg.optim.weight_decay));

  std::vector<std::size_t> order(features.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(mix_seed(cfg.seed, 2));
  std::size_t cursor = order.size();
  double last = 0;
  double lr = cfg.optim.lr;
  for (int step = 0; step < cfg.optim.steps; ++step) {
    if (cursor == order.size()) {
      std::shuffle(order.begin(), order.end(), rng);
      cursor = 0;
    }
    if (step == cfg.optim.lr_drop_step) {
      lr *= 0.1;
      for (auto& group : opt.param_groups()) static_cast<torch::optim::AdamOptions&>(group.options()).lr(lr);
    }
    const auto i = order[cursor++];
    const auto& f = features[i];
    auto pred = segment(stack, seg, f, cfg.forward, schedule, experiment_noise(cfg, f, 1000000 + step)).predictions;
    const std::vector<VideoTarget> gt{targets[i]};
    auto assignment = hungarian_match(matching_cost(pred, gt, cfg.loss));
    auto loss = total_loss(pred, gt, assignment, cfg.loss);
    const double l = loss.total.item<double>();
    check_finite(l, last, "segmentation training", step);
    last = l;
    opt.zero_grad();
    if (loss.total.requires_grad()) {
      loss.total.backward();
      if (cfg.optim.grad_clip > 0) torch::nn::utils::clip_grad_norm_(params, cfg.optim.grad_clip);
      opt.step();
    }
    std::vector<double> row{static_cast<double>(step), lr};
    for (double v : loss.values()) row.push_back(v);
    rep.rows.push_back(std::move(row));
    if ((step + 1) % 200 == 0) log::info("train step ", step + 1, " loss ", l);
    if (snapshot && cfg.eval.eval_every > 0 && (step + 1) % cfg.eval.eval_every == 0) {
      seg->eval();
      rep.snapshots.emplace_back(step + 1, snapshot(step + 1));
      seg->train();
    }
  }
  seg->eval();
  rep.frozen_checksum_after = parameter_checksum(*stack);
  VDIT_REQUIRE(rep.frozen_checksum_before == rep.frozen_checksum_after, ErrorKind::FrozenViolation, "generative stack",
               "parameter checksum changed during segmentation training");
  return rep;
}

Mask to_mask(const torch::Tensor& m) {
  VDIT_REQUIRE(m.dim() == 2, ErrorKind::ShapeMismatch, "mask", "expected [H, W]");
  auto u = (m != 0).to(torch::kUInt8).contiguous();
  Mask out(static_cast<int>(u.size(0)), static_cast<int>(u.size(1)));
  std::copy(u.data_ptr<std::uint8_t>(), u.data_ptr<std::uint8_t>() + u.numel(), out.data.begin());
  return out;
}

VideoPrediction predict_video(GenerativeStack& stack, Segmenter& seg, const SampleFeatures& f,
                              const ExperimentConfig& cfg, std::uint64_t stream) {
  torch::NoGradGuard ng;
  const NoiseSchedule schedule(cfg.forward.schedule);
  auto out = segment(stack, seg, f, cfg.forward, schedule, experiment_noise(cfg, f, stream));
  VideoPrediction vp;
  vp.query = select_instance(out.predictions.scores);
  vp.masks = (out.predictions.masks.select(1, vp.query) > 0).to(torch::kUInt8);
  vp.scores = torch::sigmoid(out.predictions.scores.select(1, vp.query)).to(torch::kFloat64);
  vp.pyramid = out.pyramid;
  return vp;
}

EvalResult evaluate(GenerativeStack& stack, Segmenter& seg, const std::vector<RenderedSample>& samples,
                    const std::vector<SampleFeatures>& features, const ExperimentConfig& cfg, int max_videos) {
  VDIT_REQUIRE(samples.size() == features.size() && !samples.empty(), ErrorKind::InvalidArgument, "eval set",
               "samples and features must be nonempty and aligned");
  const std::size_t n = max_videos < 0 ? samples.size() : std::min<std::size_t>(samples.size(), max_videos);
  stack->eval();
  seg->eval();
  EvalResult res;
  std::vector<VideoScores> scores;
  std::vector<MapSample> map_samples;
  std::vector<std::vector<double>> ious;
  std::vector<double> all_ious;
  RoiDecay roi;
  for (std::size_t v = 0; v < n; ++v) {
    const auto& s = samples[v];
    auto vp = predict_video(stack, seg, features[v], cfg, 2000000 + v);
    VideoResult vr;
    vr.query = vp.query;
    const auto sa = vp.scores.accessor<double, 1>();
    for (int t = 0; t < s.frame_count(); ++t) {
      if (!s.valid[static_cast<std::size_t>(t)]) continue;
      auto pm = to_mask(vp.masks[t]);
      auto gm = to_mask(s.gt_masks[t]);
      vr.frames.push_back(t);
      vr.iou.push_back(region_similarity(pm, gm));
      vr.f.push_back(contour_accuracy(pm, gm));
      MapSample ms;
      ms.gt = gm;
      ms.predictions.push_back({sa[t], pm});
      map_samples.push_back(std::move(ms));
    }
    all_ious.insert(all_ious.end(), vr.iou.begin(), vr.iou.end());
    scores.push_back({vr.iou, vr.f});
    ious.push_back(vr.iou);
    std::vector<bool> present;
    auto cos = roi_similarity_decay(vp.pyramid.levels[static_cast<std::size_t>(cfg.analysis.roi_level)],
                                    s.gt_masks, &present);
    roi.add(cos, present);
    res.videos.push_back(std::move(vr));
  }
  res.jf = summarize_jf(scores);
  res.map = map_suite(map_samples);
  auto diff = [&](int k) {
    std::vector<std::vector<double>> usable;
    for (const auto& v : ious)
      if (static_cast<int>(v.size()) > k) usable.push_back(v);
    return usable.empty() ? 0.0 : 100.0 * iou_diff(usable, k);
  };
  res.iou_diff1 = diff(1);
  res.iou_diff5 = diff(5);
  res.hq = hq_ratio(all_ious);
  res.roi_decay = roi.mean();
  return res;
}

}  // namespace vdit
