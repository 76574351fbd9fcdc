// Copyright 2026 The vdit Authors
// SPDX-License-Identifier: Apache-2.0

// vdit: pretrain | train | eval | ablate | analyze

#include <torch/torch.h>

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "vdit/error.hpp"
#include "vdit/harness.hpp"
#include "vdit/log.hpp"

namespace {

struct Options {
  std::string config;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "runs";
  std::string mode, fusion, noise;
  std::optional<int> step;
  std::optional<int> steps;
  bool force = false;
  bool quiet = false;
};

vdit::ExperimentConfig resolve(const Options& o) {
  auto cfg = vdit::preset_config("desk");
  if (!o.config.empty()) {
    cfg = vdit::load_config(o.config);
    if (!o.preset.empty() && o.preset != cfg.preset)
      throw vdit::Error(vdit::ErrorKind::InvalidArgument, o.preset, "--preset disagrees with the config file");
  } else if (!o.preset.empty()) {
    cfg = vdit::preset_config(o.preset);
  }
  if (o.seed) cfg.seed = *o.seed;
  if (!o.mode.empty()) cfg.forward.mode = vdit::parse_cond_mode(o.mode);
  if (!o.fusion.empty()) cfg.forward.fusion = vdit::parse_fusion(o.fusion);
  if (!o.noise.empty()) cfg.forward.noise = vdit::parse_noise_kind(o.noise);
  if (o.step) {
    if (*o.step < 1 || *o.step > cfg.forward.schedule.num_steps)
      throw vdit::Error(vdit::ErrorKind::InvalidArgument, std::to_string(*o.step), "--step must lie in [1, T]");
    cfg.forward.schedule.step = *o.step - 1;
  }
  if (o.steps) cfg.optim.steps = *o.steps;
  return cfg;
}

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config, "JSON experiment config")->check(CLI::ExistingFile);
  cmd->add_option("--preset", o.preset, "desk | quick | paper-scale");
  cmd->add_option("--seed", o.seed, "experiment seed (segmenter init, sample order, gaussian noise)");
  cmd->add_option("--out-dir", o.out_dir, "output root")->capture_default_str();
  cmd->add_option("--mode", o.mode, "conditioning: IT, I or T");
  cmd->add_option("--fusion", o.fusion, "prompt fusion: attention or concat");
  cmd->add_option("--noise", o.noise, "noise source: predicted or gaussian");
  cmd->add_option("--step", o.step, "diffusion timestep, 1-based");
  cmd->add_option("--steps", o.steps, "override the number of training steps");
  cmd->add_flag("--quiet", o.quiet, "warnings and errors only");
}

}  // namespace

int main(int argc, char** argv) {
  torch::set_num_threads(1);
  CLI::App app{"Referring video segmentation with frozen video-diffusion features"};
  app.require_subcommand(1);
  Options o;
  auto* pre = app.add_subcommand("pretrain", "train (or load) the frozen generative stack");
  auto* tr = app.add_subcommand("train", "train the segmenter; pretrains first when needed");
  auto* ev = app.add_subcommand("eval", "evaluate a trained run on the eval split");
  auto* ab = app.add_subcommand("ablate", "conditioning, fusion and timestep ablations");
  auto* an = app.add_subcommand("analyze", "feature clustering, RoI decay, temporal and lighting analysis");
  for (auto* c : {pre, tr, ev, ab, an}) add_common(c, o);
  pre->add_flag("--force", o.force, "retrain even if a checkpoint exists");
  CLI11_PARSE(app, argc, argv);

  if (o.quiet) vdit::log::threshold() = vdit::log::Level::Warn;
  try {
    const auto cfg = resolve(o);
    const std::filesystem::path out = o.out_dir;
    if (pre->parsed()) {
      const auto h = vdit::pretrain(cfg, out, o.force);
      std::cout << (h.loaded ? "loaded " : "saved ") << h.checkpoint.string() << '\n';
      if (!h.report.is_null()) std::cout << h.report.dump(2) << '\n';
    } else if (tr->parsed()) {
      const auto t = vdit::train(cfg, out);
      std::cout << t.summary.dump(2) << '\n';
    } else if (ev->parsed()) {
      const auto e = vdit::evaluate_run(cfg, out);
      std::cout << e.summary.dump(2) << '\n';
    } else if (ab->parsed()) {
      const auto a = vdit::ablate(cfg, out);
      std::cout << "tables in " << a.dir.string() << '\n';
    } else if (an->parsed()) {
      const auto a = vdit::analyze(cfg, out);
      std::cout << a.summary.dump(2) << '\n';
    }
  } catch (const vdit::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
