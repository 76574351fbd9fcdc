// Copyright 2026 The vdit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "vdit/config.hpp"
#include "vdit/training.hpp"

namespace vdit {

/// Synthetic splits for a config, generated in memory.
struct Datasets {
  std::vector<RenderedSample> train;
  std::vector<RenderedSample> eval;
};
Datasets load_datasets(const DataConfig& cfg);

/// The shipped vocabulary file when present, otherwise the built-in one.
Vocabulary default_vocabulary();

struct StackHandle {
  GenerativeStack stack{nullptr};
  Vocabulary vocab;
  std::filesystem::path checkpoint;
  bool loaded = false;  // read from disk rather than trained
  nlohmann::json report;
};

/// <out>/pretrain-<pretrain hash>/
std::filesystem::path pretrain_dir(const ExperimentConfig& cfg, const std::filesystem::path& out);
/// <out>/<run id>/
std::filesystem::path run_dir(const ExperimentConfig& cfg, const std::filesystem::path& out);

/// Loads the pretrained generative stack for this config, training and
/// saving it first when no checkpoint exists (or `force` is set).
StackHandle pretrain(const ExperimentConfig& cfg, const std::filesystem::path& out, bool force = false);

struct TrainOutcome {
  std::filesystem::path dir;
  nlohmann::json summary;
};

/// Trains the segmenter; writes loss_<hash>.csv/png, model_<hash>.pt,
/// config_<hash>.json and train_<hash>.json under the run directory.
TrainOutcome train(const ExperimentConfig& cfg, const std::filesystem::path& out);

struct EvalOutcome {
  std::filesystem::path dir;
  EvalResult result;
  nlohmann::json summary;
};

/// Evaluates a trained run on the eval split; writes per_frame, per_video,
/// map, temporal and roi_decay CSVs, roi_decay PNG and summary_<hash>.json.
EvalOutcome evaluate_run(const ExperimentConfig& cfg, const std::filesystem::path& out);

/// train (when no model exists) followed by evaluate_run.
EvalOutcome train_and_evaluate(const ExperimentConfig& cfg, const std::filesystem::path& out);

struct AblationRow {
  std::string table;
  std::string label;
  ExperimentConfig cfg;
  double ref_jf = 0, ref_j = 0, ref_f = 0;  // published values, for context
  bool ok = false;
  std::string error;
  JfSummary jf;
  double map = 0;
  double iou_diff1 = 0;
  int64_t trainable_params = 0;
};

/// The rows of the conditioning, fusion and step ablations derived from `base`.
std::vector<AblationRow> ablation_plan(const ExperimentConfig& base);

struct AblationOutcome {
  std::filesystem::path dir;
  std::vector<AblationRow> rows;
};

/// Runs every row; a failing row is recorded and the grid continues. Writes
/// table_<name>_<hash>.csv, ablation_<hash>.md and ablation_<hash>.json.
AblationOutcome ablate(const ExperimentConfig& base, const std::filesystem::path& out);

/// Trainable parameter count of the prompt fusion for the given variant.
int64_t fusion_parameter_count(const ExperimentConfig& cfg, Fusion fusion);

struct AnalysisOutcome {
  std::filesystem::path dir;
  nlohmann::json summary;
};

/// Feature clustering, RoI similarity decay, temporal consistency and
/// lighting robustness for a trained run.
AnalysisOutcome analyze(const ExperimentConfig& cfg, const std::filesystem::path& out);

/// Throws InvalidArgument for presets that cannot run on a desk machine.
void require_runnable(const ExperimentConfig& cfg);

}  // namespace vdit
