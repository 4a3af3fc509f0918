#include "core/config.hpp"

#include <fstream>

#include "core/errors.hpp"

namespace burngail {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void bad_key(const std::string& path) {
  throw ConfigError("unknown config key: " + path);
}

[[noreturn]] void bad_type(const std::string& path, const char* want) {
  throw ConfigError("config key " + path + " must be " + want);
}

double as_double(const json& v, const std::string& path) {
  if (!v.is_number()) bad_type(path, "a number");
  return v.get<double>();
}

int as_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) bad_type(path, "an integer");
  return v.get<int>();
}

uint64_t as_u64(const json& v, const std::string& path) {
  if (!v.is_number_unsigned() && !v.is_number_integer()) bad_type(path, "an integer");
  if (v.is_number_integer() && v.get<int64_t>() < 0) bad_type(path, "a non-negative integer");
  return v.get<uint64_t>();
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) bad_type(path, "a string");
  return v.get<std::string>();
}

const json& as_object(const json& v, const std::string& path) {
  if (!v.is_object()) bad_type(path, "an object");
  return v;
}

void apply_affine(FeatureAffine& a, const json& j, const std::string& path) {
  for (const auto& [key, val] : as_object(j, path).items()) {
    std::string p = path + "." + key;
    if (key == "shift") a.shift = as_double(val, p);
    else if (key == "scale") a.scale = as_double(val, p);
    else bad_key(p);
  }
}

void apply_standardization(ObsStandardization& s, const json& j, const std::string& path) {
  for (const auto& [key, val] : as_object(j, path).items()) {
    std::string p = path + "." + key;
    if (key == "lidar_dist") apply_affine(s.lidar_dist, val, p);
    else if (key == "lidar_rate") apply_affine(s.lidar_rate, val, p);
    else if (key == "speed") apply_affine(s.speed, val, p);
    else if (key == "lane_offset") apply_affine(s.lane_offset, val, p);
    else if (key == "rel_heading") apply_affine(s.rel_heading, val, p);
    else if (key == "curvature") apply_affine(s.curvature, val, p);
    else if (key == "marking_left") apply_affine(s.marking_left, val, p);
    else if (key == "marking_right") apply_affine(s.marking_right, val, p);
    else if (key == "prev_accel") apply_affine(s.prev_accel, val, p);
    else if (key == "prev_turn") apply_affine(s.prev_turn, val, p);
    else bad_key(p);
  }
}

void apply_simulator(SimulatorConfig& c, const json& j, const std::string& path) {
  for (const auto& [key, val] : as_object(j, path).items()) {
    std::string p = path + "." + key;
    if (key == "dt") c.dt = as_double(val, p);
    else if (key == "straight_length") c.straight_length = as_double(val, p);
    else if (key == "curve_radius") c.curve_radius = as_double(val, p);
    else if (key == "n_lanes") c.n_lanes = as_int(val, p);
    else if (key == "lane_width") c.lane_width = as_double(val, p);
    else if (key == "lidar_beams") c.lidar_beams = as_int(val, p);
    else if (key == "lidar_max_range") c.lidar_max_range = as_double(val, p);
    else if (key == "accel_min") c.accel_min = as_double(val, p);
    else if (key == "accel_max") c.accel_max = as_double(val, p);
    else if (key == "turn_min") c.turn_min = as_double(val, p);
    else if (key == "turn_max") c.turn_max = as_double(val, p);
    else if (key == "standardization") apply_standardization(c.standardization, val, p);
    else bad_key(p);
  }
}

void apply_style(StyleConfig& s, const json& j, const std::string& path) {
  for (const auto& [key, val] : as_object(j, path).items()) {
    std::string p = path + "." + key;
    if (key == "v0_mean") s.v0_mean = as_double(val, p);
    else if (key == "v0_std") s.v0_std = as_double(val, p);
    else if (key == "max_accel") s.max_accel = as_double(val, p);
    else if (key == "comfort_decel") s.comfort_decel = as_double(val, p);
    else if (key == "min_gap") s.min_gap = as_double(val, p);
    else if (key == "time_headway") s.time_headway = as_double(val, p);
    else if (key == "accel_exponent") s.accel_exponent = as_double(val, p);
    else if (key == "politeness") s.politeness = as_double(val, p);
    else if (key == "change_threshold") s.change_threshold = as_double(val, p);
    else if (key == "safe_decel") s.safe_decel = as_double(val, p);
    else bad_key(p);
  }
}

void apply_experts(ExpertsConfig& c, const json& j, const std::string& path) {
  for (const auto& [key, val] : as_object(j, path).items()) {
    std::string p = path + "." + key;
    if (key == "n_train") c.n_train = as_int(val, p);
    else if (key == "n_val") c.n_val = as_int(val, p);
    else if (key == "burn_in_steps") c.burn_in_steps = as_int(val, p);
    else if (key == "continuation_steps") c.continuation_steps = as_int(val, p);
    else if (key == "n_vehicles") c.n_vehicles = as_int(val, p);
    else if (key == "spawn") {
      for (const auto& [k2, v2] : as_object(val, p).items()) {
        std::string p2 = p + "." + k2;
        if (k2 == "speed_lo") c.spawn.speed_lo = as_double(v2, p2);
        else if (k2 == "speed_hi") c.spawn.speed_hi = as_double(v2, p2);
        else if (k2 == "gap_cushion") c.spawn.gap_cushion = as_double(v2, p2);
        else if (k2 == "max_retries") c.spawn.max_retries = as_int(v2, p2);
        else bad_key(p2);
      }
    } else if (key == "steer") {
      for (const auto& [k2, v2] : as_object(val, p).items()) {
        std::string p2 = p + "." + k2;
        if (k2 == "kp") c.steer.kp = as_double(v2, p2);
        else if (k2 == "kd") c.steer.kd = as_double(v2, p2);
        else bad_key(p2);
      }
    } else if (key == "styles") {
      for (const auto& [k2, v2] : as_object(val, p).items()) {
        std::string p2 = p + "." + k2;
        if (k2 == "aggressive") apply_style(c.styles[0], v2, p2);
        else if (k2 == "passive") apply_style(c.styles[1], v2, p2);
        else if (k2 == "speeder") apply_style(c.styles[2], v2, p2);
        else if (k2 == "tailgater") apply_style(c.styles[3], v2, p2);
        else bad_key(p2);
      }
    } else bad_key(p);
  }
}

void apply_models(ModelsConfig& c, const json& j, const std::string& path) {
  for (const auto& [key, val] : as_object(j, path).items()) {
    std::string p = path + "." + key;
    if (key == "trunk_hidden") c.trunk_hidden = as_int(val, p);
    else if (key == "head_hidden") c.head_hidden = as_int(val, p);
    else if (key == "embed_dim") c.embed_dim = as_int(val, p);
    else if (key == "critic_hidden") c.critic_hidden = as_int(val, p);
    else if (key == "inference_hidden") c.inference_hidden = as_int(val, p);
    else if (key == "sigma_init") c.sigma_init = as_double(val, p);
    else bad_key(p);
  }
}

void apply_trainer(TrainerConfig& c, const json& j, const std::string& path) {
  for (const auto& [key, val] : as_object(j, path).items()) {
    std::string p = path + "." + key;
    if (key == "algorithm") c.algorithm = as_string(val, p);
    else if (key == "lambda") c.lambda = as_double(val, p);
    else if (key == "eta") c.eta = as_double(val, p);
    else if (key == "gamma") c.gamma = as_double(val, p);
    else if (key == "horizon") c.horizon = as_int(val, p);
    else if (key == "rollout_steps") c.rollout_steps = as_int(val, p);
    else if (key == "critic_minibatch") c.critic_minibatch = as_int(val, p);
    else if (key == "inference_minibatch") c.inference_minibatch = as_int(val, p);
    else if (key == "critic_updates") c.critic_updates = as_int(val, p);
    else if (key == "entropy_minibatch") c.entropy_minibatch = as_int(val, p);
    else if (key == "iterations") c.iterations = as_int(val, p);
    else if (key == "checkpoint_every") c.checkpoint_every = as_int(val, p);
    else if (key == "code_mode") c.code_mode = as_string(val, p);
    else if (key == "adam_lr") c.adam_lr = as_double(val, p);
    else if (key == "adam_beta1") c.adam_beta1 = as_double(val, p);
    else if (key == "adam_beta2") c.adam_beta2 = as_double(val, p);
    else if (key == "adam_eps") c.adam_eps = as_double(val, p);
    else if (key == "rmsprop_lr") c.rmsprop_lr = as_double(val, p);
    else if (key == "rmsprop_rho") c.rmsprop_rho = as_double(val, p);
    else if (key == "rmsprop_eps") c.rmsprop_eps = as_double(val, p);
    else if (key == "clip_c") c.clip_c = as_double(val, p);
    else bad_key(p);
  }
}

void apply_trpo(TrpoSettings& c, const json& j, const std::string& path) {
  for (const auto& [key, val] : as_object(j, path).items()) {
    std::string p = path + "." + key;
    if (key == "max_kl") c.max_kl = as_double(val, p);
    else if (key == "cg_iters") c.cg_iters = as_int(val, p);
    else if (key == "cg_tol") c.cg_tol = as_double(val, p);
    else if (key == "damping") c.damping = as_double(val, p);
    else if (key == "backtrack_ratio") c.backtrack_ratio = as_double(val, p);
    else if (key == "backtrack_steps") c.backtrack_steps = as_int(val, p);
    else if (key == "baseline") c.baseline = as_string(val, p);
    else bad_key(p);
  }
}

void apply_eval(EvalSettings& c, const json& j, const std::string& path) {
  for (const auto& [key, val] : as_object(j, path).items()) {
    std::string p = path + "." + key;
    if (key == "n_rollouts") c.n_rollouts = as_int(val, p);
    else if (key == "horizon") c.horizon = as_int(val, p);
    else bad_key(p);
  }
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

ordered_json affine_json(const FeatureAffine& a) {
  return ordered_json{{"shift", a.shift}, {"scale", a.scale}};
}

ordered_json style_json(const StyleConfig& s) {
  ordered_json j;
  j["v0_mean"] = s.v0_mean;
  j["v0_std"] = s.v0_std;
  j["max_accel"] = s.max_accel;
  j["comfort_decel"] = s.comfort_decel;
  j["min_gap"] = s.min_gap;
  j["time_headway"] = s.time_headway;
  j["accel_exponent"] = s.accel_exponent;
  j["politeness"] = s.politeness;
  j["change_threshold"] = s.change_threshold;
  j["safe_decel"] = s.safe_decel;
  return j;
}

}  // namespace

void apply_json_overlay(RunConfig& cfg, const json& j) {
  for (const auto& [key, val] : as_object(j, "<root>").items()) {
    if (key == "schema_version") {
      int v = as_int(val, key);
      require(v == kConfigSchemaVersion,
              "config schema_version " + std::to_string(v) + " unsupported");
      cfg.schema_version = v;
    } else if (key == "seed") cfg.seed = as_u64(val, key);
    else if (key == "run_dir") cfg.run_dir = as_string(val, key);
    else if (key == "workers") cfg.workers = as_int(val, key);
    else if (key == "simulator") apply_simulator(cfg.simulator, val, key);
    else if (key == "experts") apply_experts(cfg.experts, val, key);
    else if (key == "models") apply_models(cfg.models, val, key);
    else if (key == "trainer") apply_trainer(cfg.trainer, val, key);
    else if (key == "trpo") apply_trpo(cfg.trpo, val, key);
    else if (key == "eval") apply_eval(cfg.eval, val, key);
    else bad_key(key);
  }
}

void set_config_key(RunConfig& cfg, const std::string& dotted_key, const std::string& value) {
  json leaf;
  try {
    leaf = json::parse(value);
  } catch (const json::exception&) {
    leaf = value;  // bare words become strings
  }
  json overlay = leaf;
  size_t end = dotted_key.size();
  while (true) {
    size_t dot = dotted_key.rfind('.', end == 0 ? std::string::npos : end - 1);
    size_t start = (dot == std::string::npos) ? 0 : dot + 1;
    std::string part = dotted_key.substr(start, end - start);
    if (part.empty()) throw ConfigError("bad config key: " + dotted_key);
    overlay = json{{part, std::move(overlay)}};
    if (dot == std::string::npos) break;
    end = dot;
  }
  apply_json_overlay(cfg, overlay);
}

TrackGeometry RunConfig::track() const {
  return build_oval_track(simulator.straight_length, simulator.curve_radius,
                          simulator.n_lanes, simulator.lane_width);
}

SimParams RunConfig::sim_params() const {
  SimParams p;
  p.dt = simulator.dt;
  p.lidar_beams = simulator.lidar_beams;
  p.lidar_max_range = simulator.lidar_max_range;
  p.accel_min = simulator.accel_min;
  p.accel_max = simulator.accel_max;
  p.turn_min = simulator.turn_min;
  p.turn_max = simulator.turn_max;
  return p;
}

StyleTable RunConfig::style_table() const {
  StyleTable t;
  for (int i = 0; i < kNumStyles; ++i) {
    const StyleConfig& s = experts.styles[i];
    StyleTemplate& e = t.entries[i];
    e.v0_mean = s.v0_mean;
    e.v0_std = s.v0_std;
    e.base.desired_speed = s.v0_mean;
    e.base.max_accel = s.max_accel;
    e.base.comfort_decel = s.comfort_decel;
    e.base.min_gap = s.min_gap;
    e.base.time_headway = s.time_headway;
    e.base.accel_exponent = s.accel_exponent;
    e.base.politeness = s.politeness;
    e.base.change_threshold = s.change_threshold;
    e.base.safe_decel = s.safe_decel;
  }
  return t;
}

DatasetSpec RunConfig::dataset_spec() const {
  DatasetSpec d;
  d.n_train = experts.n_train;
  d.n_val = experts.n_val;
  d.burn_in_steps = experts.burn_in_steps;
  d.continuation_steps = experts.continuation_steps;
  d.n_vehicles = experts.n_vehicles;
  d.seed = seed;
  d.spawn_speed_lo = experts.spawn.speed_lo;
  d.spawn_speed_hi = experts.spawn.speed_hi;
  d.spawn_gap_cushion = experts.spawn.gap_cushion;
  d.spawn_max_retries = experts.spawn.max_retries;
  return d;
}

void RunConfig::validate() const {
  require(schema_version == kConfigSchemaVersion, "schema_version must be 1");
  require(workers >= 1, "workers must be >= 1");
  require(!run_dir.empty(), "run_dir must not be empty");

  const SimulatorConfig& s = simulator;
  require(s.dt > 0.0, "simulator.dt must be > 0");
  require(s.straight_length >= 0.0, "simulator.straight_length must be >= 0");
  require(s.curve_radius > 0.0, "simulator.curve_radius must be > 0");
  require(s.n_lanes >= 2, "simulator.n_lanes must be >= 2");
  require(s.lane_width > 0.0, "simulator.lane_width must be > 0");
  require(s.lidar_beams >= 1, "simulator.lidar_beams must be >= 1");
  require(s.lidar_max_range > 0.0, "simulator.lidar_max_range must be > 0");
  require(s.accel_min < s.accel_max, "simulator accel bounds must be ordered");
  require(s.turn_min < s.turn_max, "simulator turn bounds must be ordered");
  const ObsStandardization& z = s.standardization;
  for (const FeatureAffine* a : {&z.lidar_dist, &z.lidar_rate, &z.speed, &z.lane_offset,
                                 &z.rel_heading, &z.curvature, &z.marking_left,
                                 &z.marking_right, &z.prev_accel, &z.prev_turn}) {
    require(a->scale > 0.0, "simulator.standardization scales must be > 0");
  }

  const ExpertsConfig& e = experts;
  require(e.n_train >= 0, "experts.n_train must be >= 0");
  require(e.n_val >= 0, "experts.n_val must be >= 0");
  require(e.burn_in_steps >= 1, "experts.burn_in_steps must be >= 1");
  require(e.continuation_steps >= 1, "experts.continuation_steps must be >= 1");
  require(e.n_vehicles >= 1, "experts.n_vehicles must be >= 1");
  require(e.spawn.speed_lo > 0.0 && e.spawn.speed_lo <= e.spawn.speed_hi,
          "experts.spawn speed fractions must satisfy 0 < lo <= hi");
  require(e.spawn.gap_cushion >= 0.0, "experts.spawn.gap_cushion must be >= 0");
  require(e.spawn.max_retries >= 1, "experts.spawn.max_retries must be >= 1");
  for (const StyleConfig& st : e.styles) {
    require(st.v0_mean > 0.0, "style v0_mean must be > 0");
    require(st.v0_std >= 0.0, "style v0_std must be >= 0");
    require(st.max_accel > 0.0 && st.comfort_decel > 0.0 && st.safe_decel > 0.0,
            "style accelerations must be > 0");
    require(st.min_gap > 0.0 && st.time_headway > 0.0, "style gaps must be > 0");
    require(st.politeness >= 0.0 && st.politeness <= 1.0, "style politeness must be in [0,1]");
  }

  const ModelsConfig& m = models;
  require(m.trunk_hidden >= 1 && m.head_hidden >= 1 && m.critic_hidden >= 1 &&
              m.inference_hidden >= 1 && m.embed_dim >= 1,
          "models sizes must be >= 1");
  require(m.sigma_init > 0.0, "models.sigma_init must be > 0");

  const TrainerConfig& t = trainer;
  require(t.algorithm == "gail" || t.algorithm == "infogail" || t.algorithm == "burn_infogail",
          "trainer.algorithm must be gail | infogail | burn_infogail");
  require(t.code_mode == "sampled" || t.code_mode == "vote",
          "trainer.code_mode must be sampled | vote");
  require(t.lambda >= 0.0, "trainer.lambda must be >= 0");
  require(t.eta >= 0.0, "trainer.eta must be >= 0");
  require(t.gamma > 0.0 && t.gamma < 1.0, "trainer.gamma must be in (0,1)");
  require(t.horizon >= 1, "trainer.horizon must be >= 1");
  require(t.rollout_steps >= 1, "trainer.rollout_steps must be >= 1");
  require(t.critic_minibatch >= 1 && t.inference_minibatch >= 1 && t.entropy_minibatch >= 1,
          "trainer minibatch sizes must be >= 1");
  require(t.critic_updates >= 0, "trainer.critic_updates must be >= 0");
  require(t.iterations >= 1, "trainer.iterations must be >= 1");
  require(t.checkpoint_every >= 1, "trainer.checkpoint_every must be >= 1");
  require(t.adam_lr > 0.0 && t.rmsprop_lr > 0.0, "optimizer learning rates must be > 0");
  require(t.adam_beta1 >= 0.0 && t.adam_beta1 < 1.0 && t.adam_beta2 >= 0.0 && t.adam_beta2 < 1.0,
          "adam betas must be in [0,1)");
  require(t.rmsprop_rho >= 0.0 && t.rmsprop_rho < 1.0, "rmsprop rho must be in [0,1)");
  require(t.adam_eps > 0.0 && t.rmsprop_eps > 0.0, "optimizer eps must be > 0");
  require(t.clip_c > 0.0, "trainer.clip_c must be > 0");

  const TrpoSettings& r = trpo;
  require(r.max_kl > 0.0, "trpo.max_kl must be > 0");
  require(r.cg_iters >= 1, "trpo.cg_iters must be >= 1");
  require(r.cg_tol >= 0.0, "trpo.cg_tol must be >= 0");
  require(r.damping >= 0.0, "trpo.damping must be >= 0");
  require(r.backtrack_ratio > 0.0 && r.backtrack_ratio < 1.0,
          "trpo.backtrack_ratio must be in (0,1)");
  require(r.backtrack_steps >= 1, "trpo.backtrack_steps must be >= 1");
  require(r.baseline == "linear" || r.baseline == "none",
          "trpo.baseline must be linear | none");

  require(eval.n_rollouts >= 1, "eval.n_rollouts must be >= 1");
  require(eval.horizon >= 1, "eval.horizon must be >= 1");

  // Geometry must actually construct.
  (void)track();
}

nlohmann::ordered_json config_to_json(const RunConfig& cfg) {
  ordered_json j;
  j["schema_version"] = cfg.schema_version;
  j["seed"] = cfg.seed;
  j["run_dir"] = cfg.run_dir;
  j["workers"] = cfg.workers;

  ordered_json sim;
  sim["dt"] = cfg.simulator.dt;
  sim["straight_length"] = cfg.simulator.straight_length;
  sim["curve_radius"] = cfg.simulator.curve_radius;
  sim["n_lanes"] = cfg.simulator.n_lanes;
  sim["lane_width"] = cfg.simulator.lane_width;
  sim["lidar_beams"] = cfg.simulator.lidar_beams;
  sim["lidar_max_range"] = cfg.simulator.lidar_max_range;
  sim["accel_min"] = cfg.simulator.accel_min;
  sim["accel_max"] = cfg.simulator.accel_max;
  sim["turn_min"] = cfg.simulator.turn_min;
  sim["turn_max"] = cfg.simulator.turn_max;
  ordered_json std_j;
  const ObsStandardization& z = cfg.simulator.standardization;
  std_j["lidar_dist"] = affine_json(z.lidar_dist);
  std_j["lidar_rate"] = affine_json(z.lidar_rate);
  std_j["speed"] = affine_json(z.speed);
  std_j["lane_offset"] = affine_json(z.lane_offset);
  std_j["rel_heading"] = affine_json(z.rel_heading);
  std_j["curvature"] = affine_json(z.curvature);
  std_j["marking_left"] = affine_json(z.marking_left);
  std_j["marking_right"] = affine_json(z.marking_right);
  std_j["prev_accel"] = affine_json(z.prev_accel);
  std_j["prev_turn"] = affine_json(z.prev_turn);
  sim["standardization"] = std::move(std_j);
  j["simulator"] = std::move(sim);

  ordered_json exp;
  exp["n_train"] = cfg.experts.n_train;
  exp["n_val"] = cfg.experts.n_val;
  exp["burn_in_steps"] = cfg.experts.burn_in_steps;
  exp["continuation_steps"] = cfg.experts.continuation_steps;
  exp["n_vehicles"] = cfg.experts.n_vehicles;
  exp["spawn"] = ordered_json{{"speed_lo", cfg.experts.spawn.speed_lo},
                              {"speed_hi", cfg.experts.spawn.speed_hi},
                              {"gap_cushion", cfg.experts.spawn.gap_cushion},
                              {"max_retries", cfg.experts.spawn.max_retries}};
  exp["steer"] = ordered_json{{"kp", cfg.experts.steer.kp}, {"kd", cfg.experts.steer.kd}};
  ordered_json styles;
  styles["aggressive"] = style_json(cfg.experts.styles[0]);
  styles["passive"] = style_json(cfg.experts.styles[1]);
  styles["speeder"] = style_json(cfg.experts.styles[2]);
  styles["tailgater"] = style_json(cfg.experts.styles[3]);
  exp["styles"] = std::move(styles);
  j["experts"] = std::move(exp);

  ordered_json mdl;
  mdl["trunk_hidden"] = cfg.models.trunk_hidden;
  mdl["head_hidden"] = cfg.models.head_hidden;
  mdl["embed_dim"] = cfg.models.embed_dim;
  mdl["critic_hidden"] = cfg.models.critic_hidden;
  mdl["inference_hidden"] = cfg.models.inference_hidden;
  mdl["sigma_init"] = cfg.models.sigma_init;
  j["models"] = std::move(mdl);

  ordered_json tr;
  tr["algorithm"] = cfg.trainer.algorithm;
  tr["lambda"] = cfg.trainer.lambda;
  tr["eta"] = cfg.trainer.eta;
  tr["gamma"] = cfg.trainer.gamma;
  tr["horizon"] = cfg.trainer.horizon;
  tr["rollout_steps"] = cfg.trainer.rollout_steps;
  tr["critic_minibatch"] = cfg.trainer.critic_minibatch;
  tr["inference_minibatch"] = cfg.trainer.inference_minibatch;
  tr["critic_updates"] = cfg.trainer.critic_updates;
  tr["entropy_minibatch"] = cfg.trainer.entropy_minibatch;
  tr["iterations"] = cfg.trainer.iterations;
  tr["checkpoint_every"] = cfg.trainer.checkpoint_every;
  tr["code_mode"] = cfg.trainer.code_mode;
  tr["adam_lr"] = cfg.trainer.adam_lr;
  tr["adam_beta1"] = cfg.trainer.adam_beta1;
  tr["adam_beta2"] = cfg.trainer.adam_beta2;
  tr["adam_eps"] = cfg.trainer.adam_eps;
  tr["rmsprop_lr"] = cfg.trainer.rmsprop_lr;
  tr["rmsprop_rho"] = cfg.trainer.rmsprop_rho;
  tr["rmsprop_eps"] = cfg.trainer.rmsprop_eps;
  tr["clip_c"] = cfg.trainer.clip_c;
  j["trainer"] = std::move(tr);

  ordered_json tp;
  tp["max_kl"] = cfg.trpo.max_kl;
  tp["cg_iters"] = cfg.trpo.cg_iters;
  tp["cg_tol"] = cfg.trpo.cg_tol;
  tp["damping"] = cfg.trpo.damping;
  tp["backtrack_ratio"] = cfg.trpo.backtrack_ratio;
  tp["backtrack_steps"] = cfg.trpo.backtrack_steps;
  tp["baseline"] = cfg.trpo.baseline;
  j["trpo"] = std::move(tp);

  j["eval"] = ordered_json{{"n_rollouts", cfg.eval.n_rollouts}, {"horizon", cfg.eval.horizon}};
  return j;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("bad JSON in " + path + ": " + e.what());
  }
  RunConfig cfg = RunConfig::defaults();
  apply_json_overlay(cfg, j);
  return cfg;
}

}  // namespace burngail
