#include "core/rollout.hpp"

#include <utility>

#include "core/errors.hpp"

namespace burngail {

const char* termination_name(TerminationCause c) {
  switch (c) {
    case TerminationCause::Horizon: return "horizon";
    case TerminationCause::Collision: return "collision";
    case TerminationCause::Offroad: return "offroad";
    case TerminationCause::Reversal: return "reversal";
  }
  return "unknown";
}

RolloutResult run_rollout(const TrackGeometry& track, const SimParams& sim,
                          const ObsStandardization& obsstd, const SteerGains& gains,
                          const Demonstration& demo, const Policy* policy,
                          const RolloutSpec& spec, Rng* rng) {
  if (spec.horizon < 1) throw ConfigError("rollout horizon must be at least 1");
  if (demo.handoff_scene.vehicles.size() != demo.handoff_drivers.size())
    throw RuntimeFault("run_rollout: demonstration drivers misaligned with scene");
  if (policy && spec.stochastic && !rng)
    throw RuntimeFault("run_rollout: stochastic policy rollout needs an rng");

  RolloutResult out;
  out.demo_id = demo.id;
  out.steps.reserve(spec.horizon);
  out.ego_trace.reserve(spec.horizon);

  SceneState scene = demo.handoff_scene;
  std::vector<ExpertDriver> drivers = demo.handoff_drivers;
  const int n = static_cast<int>(scene.vehicles.size());
  const int ego = scene.ego_index;
  std::vector<Action> actions(n);

  for (int t = 0; t < spec.horizon; ++t) {
    RolloutStep step;
    step.obs = build_observation(track, sim, obsstd, scene, ego);

    for (int i = 0; i < n; ++i) {
      if (i == ego && policy) continue;
      actions[i] = expert_action(track, sim, gains, scene, i, drivers);
    }
    if (policy) {
      const Eigen::VectorXd obs_vec =
          Eigen::Map<const Eigen::VectorXd>(step.obs.data(), step.obs.size());
      const Action raw = policy->act(obs_vec, spec.code, !spec.stochastic, rng);
      step.action_raw.resize(kActionDim);
      step.action_raw << raw.accel, raw.turn_rate;
      actions[ego] = clamp_action(sim, raw);
    } else {
      // Expert ego: already within the actuator range by construction.
      step.action_raw.resize(kActionDim);
      step.action_raw << actions[ego].accel, actions[ego].turn_rate;
    }
    step.action = actions[ego];

    scene = step_scene(track, sim, scene, actions);
    step.events = detect_events(track, scene, ego);

    const VehicleState& ego_state = scene.vehicles[ego];
    const GlobalPose pose = vehicle_global_pose(track, ego_state);
    out.ego_trace.push_back({pose.x, pose.y, ego_state.speed});

    const EventFlags ev = step.events;
    out.steps.push_back(std::move(step));
    if (spec.train_mode && (ev.collision || ev.offroad || ev.reversal)) {
      out.cause = ev.collision  ? TerminationCause::Collision
                  : ev.offroad ? TerminationCause::Offroad
                               : TerminationCause::Reversal;
      return out;
    }
  }
  out.cause = TerminationCause::Horizon;
  return out;
}

}  // namespace burngail
