// Copyright 2026 The vdit Authors
// SPDX-License-Identifier: Apache-2.0

#include "vdit/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "vdit/error.hpp"
#include "vdit/feature_analysis.hpp"
#include "vdit/log.hpp"
#include "vdit/report.hpp"

namespace vdit {

namespace fs = std::filesystem;

namespace {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string video_name(std::size_t v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "v%03zu", v);
  return buf;
}

std::vector<double> iota(std::size_t n, double start = 0) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = start + static_cast<double>(i);
  return x;
}

fs::path model_path(const ExperimentConfig& cfg, const fs::path& out) {
  return run_dir(cfg, out) / ("model_" + config_hash(cfg) + ".pt");
}

std::vector<RenderedSample> head(const std::vector<RenderedSample>& s, int n) {
  const auto k = std::min<std::size_t>(s.size(), static_cast<std::size_t>(std::max(n, 0)));
  return {s.begin(), s.begin() + static_cast<std::ptrdiff_t>(k)};
}

struct LoadedRun {
  StackHandle handle;
  Segmenter seg{nullptr};
};

LoadedRun load_run(const ExperimentConfig& cfg, const fs::path& out) {
  const auto model = model_path(cfg, out);
  VDIT_REQUIRE(fs::exists(model), ErrorKind::MissingFile, model.string(),
               "no trained model for this config; run `vdit train` with the same flags first");
  LoadedRun r;
  r.handle = pretrain(cfg, out);
  r.seg = make_segmenter(cfg, r.handle.stack);
  load_checkpoint(*r.seg, model);
  return r;
}

}  // namespace

void require_runnable(const ExperimentConfig& cfg) {
  VDIT_REQUIRE(cfg.preset != "paper-scale", ErrorKind::InvalidArgument, cfg.preset,
               "this preset documents the full-scale schedule and is not runnable on a desk machine");
}

Datasets load_datasets(const DataConfig& cfg) {
  log::info("generating synthetic data: ", cfg.train_videos, " train / ", cfg.eval_videos, " eval clips");
  return {make_dataset(cfg, Split::Train), make_dataset(cfg, Split::Eval)};
}

Vocabulary default_vocabulary() {
  const fs::path file = fs::path(VDIT_DATA_DIR) / "vocab.json";
  if (fs::exists(file)) return Vocabulary::load(file);
  return Vocabulary::builtin();
}

fs::path pretrain_dir(const ExperimentConfig& cfg, const fs::path& out) {
  return out / ("pretrain-" + pretrain_hash(cfg));
}

fs::path run_dir(const ExperimentConfig& cfg, const fs::path& out) { return out / run_id(cfg); }

StackHandle pretrain(const ExperimentConfig& cfg, const fs::path& out, bool force) {
  require_runnable(cfg);
  const auto hash = pretrain_hash(cfg);
  const auto dir = pretrain_dir(cfg, out);
  StackHandle h;
  h.vocab = default_vocabulary();
  h.checkpoint = dir / ("generative_" + hash + ".pt");
  torch::manual_seed(cfg.pretrain.seed);
  h.stack = GenerativeStack(cfg.model, h.vocab.size());
  const auto report_file = dir / ("pretrain_" + hash + ".json");

  if (fs::exists(h.checkpoint) && !force) {
    load_checkpoint(*h.stack, h.checkpoint);
    h.loaded = true;
    if (fs::exists(report_file)) h.report = read_json(report_file);
    h.stack->freeze();
    return h;
  }

  log::info("no generative checkpoint at ", h.checkpoint.string(), "; pretraining");
  Stopwatch clock;
  const auto data = load_datasets(cfg.data);
  const auto held_out = head(data.eval, 10);
  auto codec = pretrain_codec(h.stack->codec, data.train, held_out, cfg.pretrain.codec, cfg.pretrain.seed);
  log::info("codec: held-out PSNR ", codec.psnr, " dB");
  const NoiseSchedule schedule(cfg.forward.schedule);
  auto gen = pretrain_generator(h.stack, h.vocab, data.train, head(data.eval, cfg.pretrain.t2v.val_videos),
                                cfg.pretrain.t2v, schedule, cfg.pretrain.seed);
  log::info("generator: validation loss ", gen.val_loss_start, " -> ", gen.val_loss_end);
  h.stack->freeze();

  const auto full = to_json(cfg);
  const nlohmann::json stack_cfg = {{"data", full["data"]}, {"model", full["model"]}, {"pretrain", full["pretrain"]}};
  save_checkpoint(*h.stack, stack_cfg.dump(), h.checkpoint);
  {
    CsvWriter csv(dir / ("codec_loss_" + hash + ".csv"), {"step", "loss"});
    for (std::size_t i = 0; i < codec.loss.size(); ++i) csv.row({static_cast<double>(i + 1), codec.loss[i]});
  }
  {
    CsvWriter csv(dir / ("generator_loss_" + hash + ".csv"), {"step", "loss"});
    for (std::size_t i = 0; i < gen.loss.size(); ++i) csv.row({static_cast<double>(i + 1), gen.loss[i]});
  }
  plot_lines(dir / ("pretrain_loss_" + hash + ".png"), "pretraining loss", "step", "loss",
             {{"codec L2", iota(codec.loss.size(), 1), codec.loss},
              {"noise regression", iota(gen.loss.size(), 1), gen.loss}});
  h.report = {{"pretrain_hash", hash},
              {"codec_psnr_db", codec.psnr},
              {"latent_scale", codec.latent_scale},
              {"generator_val_loss_start", gen.val_loss_start},
              {"generator_val_loss_end", gen.val_loss_end},
              {"generator_val_drop", gen.val_drop()},
              {"stack_checksum", hex64(parameter_checksum(*h.stack))},
              {"seconds", clock.seconds()}};
  write_json(report_file, h.report);
  return h;
}

TrainOutcome train(const ExperimentConfig& cfg, const fs::path& out) {
  require_runnable(cfg);
  auto h = pretrain(cfg, out);
  Stopwatch clock;
  const auto hash = config_hash(cfg);
  const auto dir = run_dir(cfg, out);
  fs::create_directories(dir);
  write_json(dir / ("config_" + hash + ".json"), to_json(cfg));

  const auto data = load_datasets(cfg.data);
  const auto features = encode_samples(h.stack, h.vocab, data.train);
  const auto targets = make_targets(data.train);
  auto seg = make_segmenter(cfg, h.stack);

  SnapshotFn snapshot;
  std::vector<RenderedSample> snap_clips;
  std::vector<SampleFeatures> snap_features;
  if (cfg.eval.eval_every > 0) {
    snap_clips = head(data.eval, cfg.eval.snapshot_videos);
    snap_features = encode_samples(h.stack, h.vocab, snap_clips);
    snapshot = [&](int step) {
      const auto r = evaluate(h.stack, seg, snap_clips, snap_features, cfg);
      log::info("step ", step, ": snapshot J&F ", r.jf.jf);
      return r.jf.jf;
    };
  }
  log::info("training ", run_id(cfg), " for ", cfg.optim.steps, " steps");
  auto rep = train_segmenter(h.stack, seg, features, targets, cfg, snapshot);
  save_checkpoint(*seg, to_json(cfg).dump(), model_path(cfg, out));

  {
    CsvWriter csv(dir / ("loss_" + hash + ".csv"), TrainReport::column_names());
    for (const auto& r : rep.rows) csv.row(r);
  }
  if (!rep.snapshots.empty()) {
    CsvWriter csv(dir / ("snapshots_" + hash + ".csv"), {"step", "jf"});
    for (const auto& [step, jf] : rep.snapshots) csv.row({static_cast<double>(step), jf});
  }
  std::vector<Series> curves;
  const auto names = TrainReport::column_names();
  for (const std::string want : {"total", "mask_dice", "box_l1", "score_focal"}) {
    const auto col = static_cast<std::size_t>(std::find(names.begin(), names.end(), want) - names.begin());
    if (col >= names.size()) continue;
    Series s{want, {}, {}};
    for (const auto& r : rep.rows) {
      s.x.push_back(r[0]);
      s.y.push_back(r[col]);
    }
    curves.push_back(std::move(s));
  }
  plot_lines(dir / ("loss_" + hash + ".png"), "training loss " + run_id(cfg), "step", "loss", curves);

  TrainOutcome o;
  o.dir = dir;
  o.summary = {{"run_id", run_id(cfg)},
               {"config_hash", hash},
               {"steps", cfg.optim.steps},
               {"trainable_parameters", parameter_count(*seg)},
               {"frozen_checksum_before", hex64(rep.frozen_checksum_before)},
               {"frozen_checksum_after", hex64(rep.frozen_checksum_after)},
               {"final_loss", rep.rows.empty() ? 0.0 : rep.rows.back()[2]},
               {"seconds", clock.seconds()}};
  write_json(dir / ("train_" + hash + ".json"), o.summary);
  return o;
}

EvalOutcome evaluate_run(const ExperimentConfig& cfg, const fs::path& out) {
  require_runnable(cfg);
  auto run = load_run(cfg, out);
  Stopwatch clock;
  const auto hash = config_hash(cfg);
  const auto dir = run_dir(cfg, out);
  const auto data = make_dataset(cfg.data, Split::Eval);
  const auto features = encode_samples(run.handle.stack, run.handle.vocab, data);

  EvalOutcome o;
  o.dir = dir;
  o.result = evaluate(run.handle.stack, run.seg, data, features, cfg);
  const auto& r = o.result;
  {
    CsvWriter csv(dir / ("per_frame_" + hash + ".csv"), {"video", "frame", "j", "f"});
    for (std::size_t v = 0; v < r.videos.size(); ++v)
      for (std::size_t i = 0; i < r.videos[v].iou.size(); ++i)
        csv.row({video_name(v)}, {static_cast<double>(r.videos[v].frames[i]), r.videos[v].iou[i], r.videos[v].f[i]});
  }
  {
    CsvWriter csv(dir / ("per_video_" + hash + ".csv"), {"video", "query", "frames", "j", "f", "jf"});
    for (std::size_t v = 0; v < r.videos.size(); ++v) {
      const auto& vr = r.videos[v];
      double j = 0, f = 0;
      for (std::size_t i = 0; i < vr.iou.size(); ++i) {
        j += vr.iou[i];
        f += vr.f[i];
      }
      const double n = std::max<double>(1.0, static_cast<double>(vr.iou.size()));
      csv.row({video_name(v)},
              {static_cast<double>(vr.query), static_cast<double>(vr.iou.size()), j / n, f / n, (j + f) / (2 * n)});
    }
  }
  {
    CsvWriter csv(dir / ("map_" + hash + ".csv"), {"threshold", "ap"});
    for (std::size_t i = 0; i < kMapThresholds.size(); ++i) csv.row({kMapThresholds[i], r.map.ap[i]});
  }
  {
    CsvWriter csv(dir / ("metrics_" + hash + ".csv"), {"metric", "value"});
    csv.row({"j"}, {r.jf.j});
    csv.row({"f"}, {r.jf.f});
    csv.row({"jf"}, {r.jf.jf});
    csv.row({"map"}, {r.map.map});
    csv.row({"overall_iou"}, {r.map.overall_iou});
    csv.row({"mean_iou"}, {r.map.mean_iou});
    csv.row({"iou_diff_k1"}, {r.iou_diff1});
    csv.row({"iou_diff_k5"}, {r.iou_diff5});
    csv.row({"hq_ratio"}, {r.hq});
  }
  {
    CsvWriter csv(dir / ("roi_decay_" + hash + ".csv"), {"offset", "cosine"});
    for (std::size_t i = 0; i < r.roi_decay.size(); ++i) csv.row({static_cast<double>(i + 1), r.roi_decay[i]});
  }
  plot_lines(dir / ("roi_decay_" + hash + ".png"), "RoI feature similarity to frame 0", "frame offset", "cosine",
             {{run_id(cfg), iota(r.roi_decay.size(), 1), r.roi_decay}});

  nlohmann::json ap = nlohmann::json::object();
  for (std::size_t i = 0; i < kMapThresholds.size(); ++i) {
    char key[8];
    std::snprintf(key, sizeof key, "%.2f", kMapThresholds[i]);
    ap[key] = r.map.ap[i];
  }
  o.summary = {{"run_id", run_id(cfg)},
               {"config_hash", hash},
               {"videos", r.videos.size()},
               {"j", r.jf.j},
               {"f", r.jf.f},
               {"jf", r.jf.jf},
               {"map", r.map.map},
               {"ap", ap},
               {"overall_iou", r.map.overall_iou},
               {"mean_iou", r.map.mean_iou},
               {"iou_diff_k1_x100", r.iou_diff1},
               {"iou_diff_k5_x100", r.iou_diff5},
               {"hq_ratio", r.hq},
               {"roi_decay", r.roi_decay},
               {"seconds", clock.seconds()}};
  write_json(dir / ("summary_" + hash + ".json"), o.summary);
  log::info(run_id(cfg), ": J&F ", r.jf.jf, " J ", r.jf.j, " F ", r.jf.f, " mAP ", r.map.map);
  return o;
}

EvalOutcome train_and_evaluate(const ExperimentConfig& cfg, const fs::path& out) {
  if (fs::exists(model_path(cfg, out)))
    log::info("reusing trained model in ", run_dir(cfg, out).string());
  else
    train(cfg, out);
  return evaluate_run(cfg, out);
}

int64_t fusion_parameter_count(const ExperimentConfig& cfg, Fusion fusion) {
  PromptBuilder pb(cfg.model.encoder.width);
  return fusion == Fusion::Attention ? parameter_count(*pb->projection) : parameter_count(*pb->concat);
}

std::vector<AblationRow> ablation_plan(const ExperimentConfig& base) {
  std::vector<AblationRow> rows;
  auto add = [&](const std::string& table, const std::string& label, CondMode mode, Fusion fusion, NoiseKind noise,
                 int timestep, double jf, double j, double f) {
    AblationRow r;
    r.table = table;
    r.label = label;
    r.cfg = base;
    r.cfg.forward.mode = mode;
    r.cfg.forward.fusion = fusion;
    r.cfg.forward.noise = noise;
    r.cfg.forward.schedule.step = timestep - 1;
    r.ref_jf = jf;
    r.ref_j = j;
    r.ref_f = f;
    rows.push_back(std::move(r));
  };
  const auto A = Fusion::Attention;
  const auto G = NoiseKind::Gaussian, P = NoiseKind::Predicted;
  add("conditioning", "image", CondMode::I, A, G, 1, 59.7, 57.9, 61.6);
  add("conditioning", "text", CondMode::T, A, G, 1, 61.9, 60.1, 63.7);
  add("conditioning", "image+text", CondMode::IT, A, G, 1, 63.8, 62.0, 65.5);
  add("conditioning", "image+text+noise-prediction", CondMode::IT, A, P, 1, 64.8, 63.1, 66.6);
  add("fusion", "image only", CondMode::I, A, G, 1, 59.7, 57.9, 61.6);
  add("fusion", "text only", CondMode::T, A, G, 1, 61.9, 60.1, 63.7);
  add("fusion", "concat", CondMode::IT, Fusion::Concat, P, 1, 62.4, 60.8, 64.0);
  add("fusion", "attention", CondMode::IT, A, P, 1, 64.8, 63.1, 66.6);
  add("timestep", "1", CondMode::IT, A, P, 1, 64.8, 63.1, 66.6);
  add("timestep", "5", CondMode::IT, A, P, 5, 63.4, 61.6, 65.1);
  add("timestep", "10", CondMode::IT, A, P, 10, 63.5, 61.7, 65.1);
  add("timestep", "50", CondMode::IT, A, P, 50, 63.1, 61.3, 64.9);
  add("timestep", "100", CondMode::IT, A, P, 100, 62.7, 60.8, 64.5);
  for (auto& r : rows)
    if (r.cfg.forward.mode != CondMode::I) r.trainable_params = fusion_parameter_count(r.cfg, r.cfg.forward.fusion);
  return rows;
}

AblationOutcome ablate(const ExperimentConfig& base, const fs::path& out) {
  require_runnable(base);
  const auto hash = config_hash(base);
  AblationOutcome o;
  o.dir = out / ("ablate-" + hash.substr(0, 8));
  o.rows = ablation_plan(base);
  pretrain(base, out);
  for (auto& row : o.rows) {
    log::info("ablation ", row.table, " / ", row.label, ": ", run_id(row.cfg));
    try {
      const auto e = train_and_evaluate(row.cfg, out);
      row.jf = e.result.jf;
      row.map = e.result.map.map;
      row.iou_diff1 = e.result.iou_diff1;
      row.ok = true;
    } catch (const std::exception& ex) {
      row.error = ex.what();
      log::warn("ablation row ", row.table, " / ", row.label, " failed: ", ex.what());
    }
  }

  std::ostringstream md;
  nlohmann::json js = {{"config_hash", hash}, {"tables", nlohmann::json::object()}};
  for (const std::string table : {"conditioning", "fusion", "timestep"}) {
    CsvWriter csv(o.dir / ("table_" + table + "_" + hash + ".csv"),
                  {"row", "run_id", "jf", "j", "f", "map", "iou_diff_k1", "fusion_parameters", "ok",
                   "reference_jf_not_reproduced", "reference_j_not_reproduced", "reference_f_not_reproduced"});
    md << "## " << table << "\n\n"
       << "| row | J&F | J | F | mAP | fusion params | reference J&F (not reproduced) | reference J (not reproduced) "
          "| reference F (not reproduced) |\n"
       << "|---|---|---|---|---|---|---|---|---|\n";
    Series measured{"measured J&F", {}, {}}, reference{"reference J&F (not reproduced)", {}, {}};
    for (const auto& row : o.rows) {
      if (row.table != table) continue;
      csv.row({row.label, run_id(row.cfg)}, {row.jf.jf, row.jf.j, row.jf.f, row.map, row.iou_diff1,
                                             static_cast<double>(row.trainable_params), row.ok ? 1.0 : 0.0,
                                             row.ref_jf, row.ref_j, row.ref_f});
      auto cell = [&](double v) { return row.ok ? format_number(std::round(v * 100) / 100) : std::string("failed"); };
      md << "| " << row.label << " | " << cell(row.jf.jf) << " | " << cell(row.jf.j) << " | " << cell(row.jf.f)
         << " | " << cell(row.map) << " | " << row.trainable_params << " | " << row.ref_jf << " | " << row.ref_j
         << " | " << row.ref_f << " |\n";
      js["tables"][table].push_back({{"row", row.label},
                                     {"run_id", run_id(row.cfg)},
                                     {"ok", row.ok},
                                     {"error", row.error},
                                     {"jf", row.jf.jf},
                                     {"j", row.jf.j},
                                     {"f", row.jf.f},
                                     {"map", row.map},
                                     {"iou_diff_k1_x100", row.iou_diff1},
                                     {"fusion_parameters", row.trainable_params},
                                     {"reference_not_reproduced", {row.ref_jf, row.ref_j, row.ref_f}}});
      if (table == "timestep" && row.ok) {
        measured.x.push_back(std::stod(row.label));
        measured.y.push_back(row.jf.jf);
      }
      if (table == "timestep") {
        reference.x.push_back(std::stod(row.label));
        reference.y.push_back(row.ref_jf / 100);
      }
    }
    md << "\n";
    if (table == "timestep")
      plot_lines(o.dir / ("timestep_" + hash + ".png"), "J&F vs. timestep", "timestep", "J&F",
                 {measured, reference});
  }
  md << "Reference columns are published full-scale numbers shown for context; they are not reproduced here.\n";
  {
    std::ofstream f(o.dir / ("ablation_" + hash + ".md"));
    f << md.str();
  }
  write_json(o.dir / ("ablation_" + hash + ".json"), js);
  std::cout << md.str();
  return o;
}

AnalysisOutcome analyze(const ExperimentConfig& cfg, const fs::path& out) {
  require_runnable(cfg);
  auto run = load_run(cfg, out);
  auto& stack = run.handle.stack;
  auto& seg = run.seg;
  const auto& vocab = run.handle.vocab;
  const auto hash = config_hash(cfg);
  AnalysisOutcome o;
  o.dir = run_dir(cfg, out);
  const auto data = make_dataset(cfg.data, Split::Eval);
  const auto features = encode_samples(stack, vocab, data);
  const auto res = evaluate(stack, seg, data, features, cfg);
  const auto& an = cfg.analysis;
  VDIT_REQUIRE(an.kmeans_level >= 0 && an.kmeans_level < 4, ErrorKind::InvalidArgument,
               std::to_string(an.kmeans_level), "kmeans_level must index the 4-level pyramid");

  // feature clustering
  nlohmann::json km = nlohmann::json::array();
  {
    CsvWriter csv(o.dir / ("kmeans_" + hash + ".csv"), {"video", "iteration", "inertia"});
    const auto clips = std::min<std::size_t>(data.size(), static_cast<std::size_t>(std::max(an.kmeans_videos, 0)));
    for (std::size_t v = 0; v < clips; ++v) {
      const auto vp = predict_video(stack, seg, features[v], cfg, 2000000 + v);
      const auto& level = vp.pyramid.levels[static_cast<std::size_t>(an.kmeans_level)];
      const auto k = kmeans_feature_map(level, an.kmeans_k, mix_seed(cfg.seed, 3000000 + v));
      for (std::size_t i = 0; i < k.inertia.size(); ++i)
        csv.row({video_name(v)}, {static_cast<double>(i + 1), k.inertia[i]});
      const int scale = std::max<int>(1, static_cast<int>(256 / level.size(2)));
      save_label_strip(o.dir / ("kmeans_" + hash + "_" + video_name(v) + ".png"), k.labels, scale);
      km.push_back({{"video", video_name(v)}, {"iterations", k.iterations}, {"inertia", k.inertia.back()}});
    }
  }

  // lighting robustness
  const auto lit = head(data, an.lighting_videos);
  std::size_t call = 0;
  const IouFn iou = [&](const torch::Tensor& frames, const RenderedSample& s) {
    const auto f = encode_sample(stack, vocab, frames, s.expression);
    const auto vp = predict_video(stack, seg, f, cfg, 4000000 + call++);
    double sum = 0;
    int n = 0;
    for (int t = 0; t < s.frame_count(); ++t) {
      if (!s.valid[static_cast<std::size_t>(t)]) continue;
      sum += region_similarity(to_mask(vp.masks[t]), to_mask(s.gt_masks[t]));
      ++n;
    }
    return n ? sum / n : 0.0;
  };
  const auto curve = lighting_robustness(lit, an.lighting_levels, iou, cfg.seed);
  Series lighting{"mean IoU", {}, {}};
  {
    CsvWriter csv(o.dir / ("lighting_" + hash + ".csv"), {"level", "mean_iou"});
    for (const auto& p : curve) {
      csv.row({p.level, p.mean_iou});
      lighting.x.push_back(p.level);
      lighting.y.push_back(p.mean_iou);
    }
  }
  plot_lines(o.dir / ("lighting_" + hash + ".png"), "brightness perturbation", "level", "mean IoU", {lighting});

  {
    CsvWriter csv(o.dir / ("temporal_" + hash + ".csv"), {"metric", "value"});
    csv.row({"iou_diff_k1"}, {res.iou_diff1});
    csv.row({"iou_diff_k5"}, {res.iou_diff5});
    csv.row({"hq_ratio"}, {res.hq});
  }
  {
    CsvWriter csv(o.dir / ("roi_decay_" + hash + ".csv"), {"offset", "cosine"});
    for (std::size_t i = 0; i < res.roi_decay.size(); ++i) csv.row({static_cast<double>(i + 1), res.roi_decay[i]});
  }
  plot_lines(o.dir / ("roi_decay_" + hash + ".png"), "RoI feature similarity to frame 0", "frame offset", "cosine",
             {{run_id(cfg), iota(res.roi_decay.size(), 1), res.roi_decay}});

  nlohmann::json light = nlohmann::json::array();
  for (const auto& p : curve) light.push_back({{"level", p.level}, {"mean_iou", p.mean_iou}});
  o.summary = {{"run_id", run_id(cfg)},   {"config_hash", hash},         {"kmeans", km},
               {"lighting", light},       {"iou_diff_k1_x100", res.iou_diff1}, {"iou_diff_k5_x100", res.iou_diff5},
               {"hq_ratio", res.hq},      {"roi_decay", res.roi_decay}};
  write_json(o.dir / ("analysis_" + hash + ".json"), o.summary);
  return o;
}

}  // namespace vdit
