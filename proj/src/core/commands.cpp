#include "core/commands.hpp"

#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "core/checkpoint.hpp"
#include "core/dataset.hpp"
#include "core/errors.hpp"
#include "core/metrics.hpp"

namespace burngail {

namespace fs = std::filesystem;

namespace {

// The resolved configuration goes into the run directory before any work, so
// every artifact can be traced back to the exact settings that produced it.
void write_resolved_config(const RunConfig& cfg) {
  fs::create_directories(cfg.run_dir);
  const fs::path path = fs::path(cfg.run_dir) / "config.json";
  std::ofstream out(path, std::ios::trunc);
  out << config_to_json(cfg).dump(2) << '\n';
  if (!out) throw RuntimeFault("cannot write " + path.string());
}

fs::path dataset_dir(const RunConfig& cfg) { return fs::path(cfg.run_dir) / "dataset"; }

bool non_empty_file(const fs::path& p) {
  std::error_code ec;
  return fs::is_regular_file(p, ec) && fs::file_size(p, ec) > 0;
}

std::vector<Demonstration> read_dataset_split(const RunConfig& cfg, const std::string& name) {
  const fs::path path = dataset_dir(cfg) / (name + ".jsonl");
  if (!fs::exists(path))
    throw ConfigError("dataset split not found at " + path.string() +
                      "; run gen-demos into this run directory first");
  std::vector<Demonstration> demos = read_demos_jsonl(path.string());
  const int obs_dim = observation_dim(cfg.sim_params());
  for (const Demonstration& d : demos)
    for (const BurnInPair& p : d.burn_in)
      if (static_cast<int>(p.obs.size()) != obs_dim)
        throw ConfigError(path.string() + ": demonstration " + std::to_string(d.id) +
                          " has " + std::to_string(p.obs.size()) +
                          "-dim observations but the configured simulator produces " +
                          std::to_string(obs_dim) + "-dim ones");
  return demos;
}

// Resolves the checkpoint to operate on: an explicit path must exist; an
// empty argument means the newest numbered checkpoint of the run.
std::string resolve_checkpoint(const RunConfig& cfg, const std::string& checkpoint) {
  if (!checkpoint.empty()) {
    if (!fs::exists(checkpoint))
      throw ConfigError("checkpoint not found: " + checkpoint);
    return checkpoint;
  }
  const fs::path dir = fs::path(cfg.run_dir) / "checkpoints";
  std::string latest = find_latest_checkpoint(dir.string());
  if (latest.empty())
    throw ConfigError("no checkpoint under " + dir.string() +
                      "; train first or pass an explicit checkpoint path");
  return latest;
}

nlohmann::ordered_json split_summary(const std::string& file,
                                     const std::vector<Demonstration>& demos) {
  nlohmann::ordered_json j;
  j["file"] = file;
  j["count"] = demos.size();
  j["class_histogram"] = class_histogram(demos);
  return j;
}

}  // namespace

GenDemosResult cmd_gen_demos(const RunConfig& cfg, bool force) {
  cfg.validate();
  const fs::path dir = dataset_dir(cfg);
  const fs::path train_path = dir / "train.jsonl";
  const fs::path val_path = dir / "val.jsonl";
  const fs::path manifest_path = dir / "manifest.json";
  if (!force && (non_empty_file(train_path) || non_empty_file(val_path)))
    throw ConfigError(dir.string() +
                      " already holds a dataset; pass --force to overwrite it");

  write_resolved_config(cfg);
  fs::create_directories(dir);

  const DatasetSpec spec = cfg.dataset_spec();
  const TrackGeometry track = cfg.track();
  const SimParams sim = cfg.sim_params();
  const std::vector<Demonstration> train =
      generate_demos(track, sim, cfg.simulator.standardization, cfg.experts.steer,
                     cfg.style_table(), spec, 0, spec.n_train, cfg.workers);
  const std::vector<Demonstration> val =
      generate_demos(track, sim, cfg.simulator.standardization, cfg.experts.steer,
                     cfg.style_table(), spec, spec.n_train, spec.n_val, cfg.workers);
  write_demos_jsonl(train_path.string(), train);
  write_demos_jsonl(val_path.string(), val);

  nlohmann::ordered_json manifest;
  manifest["schema_version"] = kDatasetSchemaVersion;
  manifest["seed"] = cfg.seed;
  manifest["train"] = split_summary("train.jsonl", train);
  manifest["val"] = split_summary("val.jsonl", val);
  manifest["config"] = config_to_json(cfg);
  std::ofstream out(manifest_path, std::ios::trunc);
  out << manifest.dump(2) << '\n';
  if (!out) throw RuntimeFault("cannot write " + manifest_path.string());

  GenDemosResult result;
  result.train_path = train_path.string();
  result.val_path = val_path.string();
  result.manifest_path = manifest_path.string();
  result.n_train = static_cast<int>(train.size());
  result.n_val = static_cast<int>(val.size());
  return result;
}

TrainResult cmd_train(const RunConfig& cfg) {
  cfg.validate();
  const std::vector<Demonstration> train = read_dataset_split(cfg, "train");
  const std::vector<Demonstration> val = read_dataset_split(cfg, "val");
  if (train.empty())
    throw ConfigError((dataset_dir(cfg) / "train.jsonl").string() + " holds no demonstrations");
  write_resolved_config(cfg);
  return train_run(cfg, train, val);
}

EvalResult cmd_eval(const RunConfig& cfg, const std::string& checkpoint) {
  cfg.validate();
  const std::string ckpt = resolve_checkpoint(cfg, checkpoint);
  const ModelBundle bundle = load_bundle(ckpt, cfg);
  const std::vector<Demonstration> val = read_dataset_split(cfg, "val");
  if (val.empty())
    throw ConfigError((dataset_dir(cfg) / "val.jsonl").string() + " holds no demonstrations");
  write_resolved_config(cfg);

  const TrackGeometry track = cfg.track();
  const SimParams sim = cfg.sim_params();
  const ObsStandardization& obsstd = cfg.simulator.standardization;
  const SteerGains& gains = cfg.experts.steer;
  const CodeMode mode = code_mode_for(cfg.trainer.algorithm);

  const RmseCurves rmse =
      rmse_eval(track, sim, obsstd, gains, &bundle.policy, &bundle.inference, val,
                cfg.eval.n_rollouts, cfg.eval.horizon, mode, cfg.seed, cfg.workers);
  const EventFractions events =
      event_frequencies(track, sim, obsstd, gains, &bundle.policy, &bundle.inference, val,
                        cfg.eval.n_rollouts, cfg.eval.horizon, mode, cfg.seed, cfg.workers);

  const double reader_ami = validation_ami(bundle.inference, val).score;
  const std::vector<int> kmeans_labels =
      kmeans_demo_labels(val, kCodeDim, derive_seed(cfg.seed, "kmeans_eval"), 8);
  const double kmeans_ami =
      adjusted_mutual_information(kmeans_labels, true_demo_labels(val)).score;

  EvalResult result;
  result.rmse_path = (fs::path(cfg.run_dir) / "rmse.csv").string();
  result.events_path = (fs::path(cfg.run_dir) / "events.csv").string();
  result.ami_path = (fs::path(cfg.run_dir) / "ami.csv").string();
  result.checkpoint = ckpt;
  result.reader_val_ami = reader_ami;
  result.kmeans_val_ami = kmeans_ami;
  result.events = events;
  result.resampled = rmse.resampled;
  write_rmse_csv(result.rmse_path, rmse);
  write_events_csv(result.events_path, events);
  write_ami_csv(result.ami_path, {AmiRow{cfg.trainer.algorithm, "val", reader_ami},
                                  AmiRow{"kmeans", "val", kmeans_ami}});
  return result;
}

ExportResult cmd_export(const RunConfig& cfg, const std::string& checkpoint) {
  cfg.validate();
  const std::string ckpt = resolve_checkpoint(cfg, checkpoint);
  const ModelBundle bundle = load_bundle(ckpt, cfg);
  const std::vector<Demonstration> val = read_dataset_split(cfg, "val");
  if (val.empty())
    throw ConfigError((dataset_dir(cfg) / "val.jsonl").string() + " holds no demonstrations");
  write_resolved_config(cfg);

  constexpr int kTrialsPerCode = 10;
  ExportResult result;
  result.trajectories_path = (fs::path(cfg.run_dir) / "trajectories.jsonl").string();
  result.embedding_path = (fs::path(cfg.run_dir) / "embedding.csv").string();
  result.checkpoint = ckpt;
  result.n_trajectories = kCodeDim * kTrialsPerCode;
  write_trajectories_jsonl(result.trajectories_path, cfg.track(), cfg.sim_params(),
                           cfg.simulator.standardization, cfg.experts.steer, bundle.policy,
                           val, kTrialsPerCode, cfg.eval.horizon, cfg.seed);
  write_embedding_csv(result.embedding_path, bundle.policy);
  return result;
}

}  // namespace burngail
