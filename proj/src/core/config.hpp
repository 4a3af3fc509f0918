#pragma once

#include <array>
#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "core/dataset.hpp"
#include "core/experts.hpp"
#include "core/scene.hpp"
#include "core/track.hpp"

namespace burngail {

constexpr int kConfigSchemaVersion = 1;

struct SpawnConfig {
  double speed_lo = 0.70;
  double speed_hi = 0.95;
  double gap_cushion = 5.0;
  int max_retries = 200;
};

// StyleParams template plus the desired-speed distribution, as configured.
struct StyleConfig {
  double v0_mean = 15.0;
  double v0_std = 1.0;
  double max_accel = 2.0;
  double comfort_decel = 2.0;
  double min_gap = 2.0;
  double time_headway = 1.5;
  double accel_exponent = 4.0;
  double politeness = 0.3;
  double change_threshold = 0.2;
  double safe_decel = 4.0;
};

struct SimulatorConfig {
  double dt = 0.1;
  double straight_length = 100.0;
  double curve_radius = 30.0;
  int n_lanes = 2;
  double lane_width = 3.0;
  int lidar_beams = 20;
  double lidar_max_range = 100.0;
  double accel_min = -4.0;
  double accel_max = 4.0;
  double turn_min = -0.5;
  double turn_max = 0.5;
  ObsStandardization standardization;
};

// Order: aggressive, passive, speeder, tailgater. A 2x2 of desired speed
// (fast/slow) against following distance (close/far).
inline std::array<StyleConfig, kNumStyles> default_styles() {
  std::array<StyleConfig, kNumStyles> s;
  s[0] = StyleConfig{18.0, 1.0, 3.0, 2.0, 1.0, 0.5, 4.0, 0.3, 0.2, 4.0};
  s[1] = StyleConfig{10.0, 1.0, 1.5, 2.0, 4.0, 2.0, 4.0, 0.3, 0.2, 4.0};
  s[2] = StyleConfig{18.0, 1.0, 3.0, 2.0, 4.0, 2.0, 4.0, 0.3, 0.2, 4.0};
  s[3] = StyleConfig{10.0, 1.0, 1.5, 2.0, 1.0, 0.5, 4.0, 0.3, 0.2, 4.0};
  return s;
}

struct ExpertsConfig {
  int n_train = 960;
  int n_val = 480;
  int burn_in_steps = 50;
  int continuation_steps = 300;
  int n_vehicles = 12;
  SpawnConfig spawn;
  SteerGains steer;
  std::array<StyleConfig, kNumStyles> styles = default_styles();
};

struct ModelsConfig {
  int trunk_hidden = 64;
  int head_hidden = 64;
  int embed_dim = 16;
  int critic_hidden = 64;
  int inference_hidden = 64;
  double sigma_init = 0.5;
};

struct TrainerConfig {
  std::string algorithm = "burn_infogail";  // gail | infogail | burn_infogail
  double lambda = 500.0;                    // entropy-regularizer weight
  double eta = 1.0;                         // style-reward weight
  double gamma = 0.99;
  int horizon = 200;
  int rollout_steps = 4000;
  int critic_minibatch = 256;
  int inference_minibatch = 1024;
  int critic_updates = 5;
  int entropy_minibatch = 64;
  int iterations = 500;
  int checkpoint_every = 25;
  std::string code_mode = "sampled";  // sampled | vote (burn-in code source)
  double adam_lr = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double rmsprop_lr = 5e-5;
  double rmsprop_rho = 0.9;
  double rmsprop_eps = 1e-8;
  double clip_c = 0.01;
};

struct TrpoSettings {
  double max_kl = 0.01;
  int cg_iters = 10;
  double cg_tol = 1e-10;
  double damping = 0.1;
  double backtrack_ratio = 0.8;
  int backtrack_steps = 10;
  std::string baseline = "linear";  // linear | none
};

struct EvalSettings {
  int n_rollouts = 1000;
  int horizon = 300;
};

struct RunConfig {
  int schema_version = kConfigSchemaVersion;
  uint64_t seed = 42;
  std::string run_dir = "runs/run";
  int workers = 1;
  SimulatorConfig simulator;
  ExpertsConfig experts;
  ModelsConfig models;
  TrainerConfig trainer;
  TrpoSettings trpo;
  EvalSettings eval;

  static RunConfig defaults() { return RunConfig{}; }

  // Views over the config for the core modules.
  TrackGeometry track() const;
  SimParams sim_params() const;
  StyleTable style_table() const;
  DatasetSpec dataset_spec() const;

  void validate() const;  // throws ConfigError with the offending key
};

// Strict overlay: every key in `j` must name a known field; scalars replace
// defaults. Unknown keys throw ConfigError with the dotted path.
void apply_json_overlay(RunConfig& cfg, const nlohmann::json& j);

// Parse + overlay a single dotted key ("trainer.lambda") with a JSON literal
// value; bare words fall back to strings so callers can pass e.g. "gail".
void set_config_key(RunConfig& cfg, const std::string& dotted_key, const std::string& value);

nlohmann::ordered_json config_to_json(const RunConfig& cfg);
RunConfig load_config_file(const std::string& path);

}  // namespace burngail
