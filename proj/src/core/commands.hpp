#pragma once

#include <string>
#include <vector>

#include "core/config.hpp"
#include "core/metrics.hpp"
#include "core/trainer.hpp"

namespace burngail {

// A run directory is the unit of reproducibility. Every command resolves its
// configuration, writes it to <run_dir>/config.json before doing anything
// else, and reads/writes the fixed layout:
//   dataset/train.jsonl, dataset/val.jsonl, dataset/manifest.json
//   checkpoints/ckpt_NNNNNN.bgc, best.bgc
//   metrics.csv
//   rmse.csv, events.csv, ami.csv, trajectories.jsonl, embedding.csv

struct GenDemosResult {
  std::string train_path;
  std::string val_path;
  std::string manifest_path;
  int n_train = 0;
  int n_val = 0;
};

// Generates the expert demonstration dataset into <run_dir>/dataset. An
// existing non-empty dataset is refused unless force is set.
GenDemosResult cmd_gen_demos(const RunConfig& cfg, bool force);

// Trains (or resumes) from <run_dir>/dataset; a missing dataset is a
// ConfigError naming the expected file.
TrainResult cmd_train(const RunConfig& cfg);

struct EvalResult {
  std::string rmse_path;
  std::string events_path;
  std::string ami_path;
  std::string checkpoint;   // the checkpoint actually evaluated
  double reader_val_ami = 0.0;
  double kmeans_val_ami = 0.0;
  EventFractions events;
  bool resampled = false;  // eval drew more rollouts than validation demos
};

// Evaluates a checkpoint (the latest one under <run_dir>/checkpoints when
// `checkpoint` is empty) against the validation set: RMSE curves, dangerous-
// event fractions, and AMI of the style reader and of the k-means baseline.
EvalResult cmd_eval(const RunConfig& cfg, const std::string& checkpoint);

struct ExportResult {
  std::string trajectories_path;
  std::string embedding_path;
  std::string checkpoint;
  int n_trajectories = 0;
};

// Exports plotting artifacts for a checkpoint: deterministic trajectories
// under each forced style code (10 trials per code) and the 4x16 style
// embedding matrix.
ExportResult cmd_export(const RunConfig& cfg, const std::string& checkpoint);

}  // namespace burngail
