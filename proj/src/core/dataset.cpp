#include "core/dataset.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <thread>

#include <nlohmann/json.hpp>

#include "core/errors.hpp"

namespace burngail {

using ordered_json = nlohmann::ordered_json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Hard-braking distance a follower needs to shed its closing speed, plus a
// cushion. Spawn layouts violating this for any same-lane pair are retried.
double required_gap(const DatasetSpec& spec, double v_back, double v_front) {
  double closing = std::max(0.0, v_back - v_front);
  return spec.spawn_gap_cushion + closing * closing / (2.0 * 4.0);
}

bool layout_valid(const TrackGeometry& track, const DatasetSpec& spec,
                  const SceneState& scene) {
  int n = static_cast<int>(scene.vehicles.size());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const VehicleState& a = scene.vehicles[i];
      const VehicleState& b = scene.vehicles[j];
      if (nearest_lane(track, a.t) != nearest_lane(track, b.t)) continue;
      double ds = wrap_s(track, b.s - a.s);  // distance with b ahead of a
      if (ds <= 0.0) return false;           // coincident s in one lane
      double gap = ds - 0.5 * (a.length + b.length);
      if (gap < required_gap(spec, a.speed, b.speed)) return false;
    }
  }
  for (int i = 0; i < n; ++i) {
    auto ci = rect_corners(vehicle_global_pose(track, scene.vehicles[i]),
                           scene.vehicles[i].length, scene.vehicles[i].width);
    for (int j = i + 1; j < n; ++j) {
      auto cj = rect_corners(vehicle_global_pose(track, scene.vehicles[j]),
                             scene.vehicles[j].length, scene.vehicles[j].width);
      if (rects_overlap(ci, cj)) return false;
    }
  }
  return true;
}

}  // namespace

SceneState spawn_scene(const TrackGeometry& track, const SimParams& sim,
                       const StyleTable& table, const DatasetSpec& spec,
                       StyleClass ego_class, Rng& rng,
                       std::vector<ExpertDriver>* drivers_out) {
  if (spec.n_vehicles < 1) throw ConfigError("spawn_scene: need at least one vehicle");
  double slot = track.centerline_length / spec.n_vehicles;
  for (int attempt = 0; attempt < spec.spawn_max_retries; ++attempt) {
    SceneState scene;
    scene.time_index = 0;
    scene.ego_index = 0;
    std::vector<ExpertDriver> drivers;
    for (int i = 0; i < spec.n_vehicles; ++i) {
      StyleClass cls = (i == 0) ? ego_class
                                : static_cast<StyleClass>(rng.uniform_int(kNumStyles));
      StyleParams p = sample_style(table, cls, rng);
      int lane = rng.uniform_int(track.n_lanes);
      VehicleState v;
      v.s = wrap_s(track, i * slot + rng.uniform(0.0, 0.4 * slot));
      v.t = lane_center(track, lane);
      v.heading_rel = 0.0;
      v.speed = p.desired_speed * rng.uniform(spec.spawn_speed_lo, spec.spawn_speed_hi);
      // Never spawn faster than the vehicle could brake down from before the
      // next curve (comfort_decel budget), or it would understeer off line.
      double feasible = kInf;
      for (double d = 0.0; d <= 80.0; d += 5.0) {
        double v_lim = curve_speed_limit(track, sim, lane, wrap_s(track, v.s + d));
        if (v_lim < kInf) {
          feasible = std::min(feasible,
                              std::sqrt(v_lim * v_lim + 2.0 * p.comfort_decel * d));
        }
      }
      v.speed = std::min(v.speed, feasible);
      v.style_class = static_cast<int>(cls);
      scene.vehicles.push_back(v);
      ExpertDriver d;
      d.params = p;
      d.target_lane = lane;
      d.style = cls;
      drivers.push_back(d);
    }
    if (layout_valid(track, spec, scene)) {
      if (drivers_out) *drivers_out = std::move(drivers);
      return scene;
    }
  }
  throw RuntimeFault("spawn_scene: no collision-free placement after " +
                     std::to_string(spec.spawn_max_retries) + " attempts");
}

Demonstration generate_demo(const TrackGeometry& track, const SimParams& sim,
                            const ObsStandardization& obsstd, const SteerGains& gains,
                            const StyleTable& table, const DatasetSpec& spec, int id) {
  uint64_t dseed = derive_seed(spec.seed, "demo", static_cast<uint64_t>(id));
  Rng rng(dseed);
  StyleClass ego_class = static_cast<StyleClass>(id % kNumStyles);

  Demonstration demo;
  demo.id = id;
  demo.style_class = id % kNumStyles;
  demo.rng_seed = dseed;

  std::vector<ExpertDriver> drivers;
  SceneState scene = spawn_scene(track, sim, table, spec, ego_class, rng, &drivers);
  demo.v0 = drivers[0].params.desired_speed;

  const int n = spec.n_vehicles;
  std::vector<Action> actions(n);
  demo.burn_in.reserve(spec.burn_in_steps);
  for (int t = 0; t < spec.burn_in_steps; ++t) {
    Observation obs = build_observation(track, sim, obsstd, scene, scene.ego_index);
    for (int i = 0; i < n; ++i) actions[i] = expert_action(track, sim, gains, scene, i, drivers);
    demo.burn_in.push_back({std::move(obs), actions[scene.ego_index]});
    scene = step_scene(track, sim, scene, actions);
  }

  demo.handoff_scene = scene;
  demo.handoff_drivers = drivers;  // snapshot; the continuation keeps mutating `drivers`

  demo.expert_continuation.reserve(spec.continuation_steps);
  for (int t = 0; t < spec.continuation_steps; ++t) {
    for (int i = 0; i < n; ++i) actions[i] = expert_action(track, sim, gains, scene, i, drivers);
    scene = step_scene(track, sim, scene, actions);
    const VehicleState& ego = scene.vehicles[scene.ego_index];
    GlobalPose pose = vehicle_global_pose(track, ego);
    demo.expert_continuation.push_back({pose.x, pose.y, ego.speed});
  }
  return demo;
}

std::vector<Demonstration> generate_demos(const TrackGeometry& track, const SimParams& sim,
                                          const ObsStandardization& obsstd,
                                          const SteerGains& gains, const StyleTable& table,
                                          const DatasetSpec& spec, int first_id, int count,
                                          int workers) {
  std::vector<Demonstration> out(count);
  if (workers < 1) workers = 1;
  workers = std::min(workers, std::max(count, 1));
  auto work = [&](int w) {
    for (int k = w; k < count; k += workers) {
      out[k] = generate_demo(track, sim, obsstd, gains, table, spec, first_id + k);
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
  }
  return out;
}

namespace {

ordered_json params_to_json(const StyleParams& p) {
  ordered_json j;
  j["desired_speed"] = p.desired_speed;
  j["max_accel"] = p.max_accel;
  j["comfort_decel"] = p.comfort_decel;
  j["min_gap"] = p.min_gap;
  j["time_headway"] = p.time_headway;
  j["accel_exponent"] = p.accel_exponent;
  j["politeness"] = p.politeness;
  j["change_threshold"] = p.change_threshold;
  j["safe_decel"] = p.safe_decel;
  return j;
}

StyleParams params_from_json(const nlohmann::json& j) {
  StyleParams p;
  p.desired_speed = j.at("desired_speed").get<double>();
  p.max_accel = j.at("max_accel").get<double>();
  p.comfort_decel = j.at("comfort_decel").get<double>();
  p.min_gap = j.at("min_gap").get<double>();
  p.time_headway = j.at("time_headway").get<double>();
  p.accel_exponent = j.at("accel_exponent").get<double>();
  p.politeness = j.at("politeness").get<double>();
  p.change_threshold = j.at("change_threshold").get<double>();
  p.safe_decel = j.at("safe_decel").get<double>();
  return p;
}

ordered_json demo_to_json(const Demonstration& d) {
  ordered_json j;
  j["schema_version"] = kDatasetSchemaVersion;
  j["id"] = d.id;
  j["style_class"] = d.style_class;
  j["v0"] = d.v0;
  ordered_json burn = ordered_json::array();
  for (const BurnInPair& p : d.burn_in) {
    ordered_json e;
    e["obs"] = p.obs;
    e["accel"] = p.action.accel;
    e["turn_rate"] = p.action.turn_rate;
    burn.push_back(std::move(e));
  }
  j["burn_in"] = std::move(burn);
  ordered_json scene;
  scene["time_index"] = d.handoff_scene.time_index;
  scene["ego_index"] = d.handoff_scene.ego_index;
  ordered_json vehicles = ordered_json::array();
  for (size_t i = 0; i < d.handoff_scene.vehicles.size(); ++i) {
    const VehicleState& v = d.handoff_scene.vehicles[i];
    const ExpertDriver& drv = d.handoff_drivers[i];
    ordered_json e;
    e["s"] = v.s;
    e["t"] = v.t;
    e["heading_rel"] = v.heading_rel;
    e["speed"] = v.speed;
    e["length"] = v.length;
    e["width"] = v.width;
    e["style_class"] = v.style_class;
    e["prev_accel"] = v.prev_accel;
    e["prev_turn"] = v.prev_turn;
    e["target_lane"] = drv.target_lane;
    e["params"] = params_to_json(drv.params);
    vehicles.push_back(std::move(e));
  }
  scene["vehicles"] = std::move(vehicles);
  j["handoff_scene"] = std::move(scene);
  ordered_json cont = ordered_json::array();
  for (const ContinuationPoint& p : d.expert_continuation) {
    cont.push_back(ordered_json::array({p.x, p.y, p.v}));
  }
  j["expert_continuation"] = std::move(cont);
  j["rng_seed"] = d.rng_seed;
  return j;
}

Demonstration demo_from_json(const nlohmann::json& j) {
  int ver = j.at("schema_version").get<int>();
  if (ver != kDatasetSchemaVersion) {
    throw ConfigError("dataset schema_version " + std::to_string(ver) +
                      " unsupported (expected " + std::to_string(kDatasetSchemaVersion) + ")");
  }
  Demonstration d;
  d.id = j.at("id").get<int>();
  d.style_class = j.at("style_class").get<int>();
  d.v0 = j.at("v0").get<double>();
  for (const auto& e : j.at("burn_in")) {
    BurnInPair p;
    p.obs = e.at("obs").get<std::vector<double>>();
    p.action.accel = e.at("accel").get<double>();
    p.action.turn_rate = e.at("turn_rate").get<double>();
    d.burn_in.push_back(std::move(p));
  }
  const auto& scene = j.at("handoff_scene");
  d.handoff_scene.time_index = scene.at("time_index").get<int64_t>();
  d.handoff_scene.ego_index = scene.at("ego_index").get<int>();
  for (const auto& e : scene.at("vehicles")) {
    VehicleState v;
    v.s = e.at("s").get<double>();
    v.t = e.at("t").get<double>();
    v.heading_rel = e.at("heading_rel").get<double>();
    v.speed = e.at("speed").get<double>();
    v.length = e.at("length").get<double>();
    v.width = e.at("width").get<double>();
    v.style_class = e.at("style_class").get<int>();
    v.prev_accel = e.at("prev_accel").get<double>();
    v.prev_turn = e.at("prev_turn").get<double>();
    d.handoff_scene.vehicles.push_back(v);
    ExpertDriver drv;
    drv.target_lane = e.at("target_lane").get<int>();
    drv.params = params_from_json(e.at("params"));
    drv.style = static_cast<StyleClass>(v.style_class);
    d.handoff_drivers.push_back(drv);
  }
  for (const auto& e : j.at("expert_continuation")) {
    ContinuationPoint p;
    p.x = e.at(0).get<double>();
    p.y = e.at(1).get<double>();
    p.v = e.at(2).get<double>();
    d.expert_continuation.push_back(p);
  }
  d.rng_seed = j.at("rng_seed").get<uint64_t>();
  return d;
}

}  // namespace

void write_demos_jsonl(const std::string& path, const std::vector<Demonstration>& demos) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeFault("cannot open for writing: " + path);
  for (const Demonstration& d : demos) {
    out << demo_to_json(d).dump() << '\n';
  }
  if (!out) throw RuntimeFault("write failed: " + path);
}

std::vector<Demonstration> read_demos_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RuntimeFault("cannot open dataset file: " + path);
  std::vector<Demonstration> demos;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": bad JSON: " + e.what());
    }
    try {
      demos.push_back(demo_from_json(j));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": bad record: " + e.what());
    }
  }
  return demos;
}

std::array<int, kNumStyles> class_histogram(const std::vector<Demonstration>& demos) {
  std::array<int, kNumStyles> h{};
  for (const Demonstration& d : demos) {
    if (d.style_class >= 0 && d.style_class < kNumStyles) h[d.style_class] += 1;
  }
  return h;
}

}  // namespace burngail
