#pragma once

#include <Eigen/Dense>
#include <vector>

#include "core/dataset.hpp"
#include "core/experts.hpp"
#include "core/models.hpp"
#include "core/rng.hpp"
#include "core/scene.hpp"
#include "core/track.hpp"

namespace burngail {

enum class TerminationCause { Horizon, Collision, Offroad, Reversal };

const char* termination_name(TerminationCause c);

struct RolloutSpec {
  int horizon = 200;
  bool train_mode = true;   // stop at the first ego collision/offroad/reversal
  bool stochastic = true;   // sample actions; false uses the policy mean
  LatentCode code;          // style conditioning, fixed for the whole rollout
};

struct RolloutStep {
  Observation obs;             // ego observation the action was chosen from
  Eigen::VectorXd action_raw;  // policy sample before clamping (for log-probs)
  Action action;               // clamped action actually applied
  EventFlags events;           // ego events measured after the step
};

struct RolloutResult {
  int demo_id = 0;
  std::vector<RolloutStep> steps;
  // Ego pose and speed after each step, aligned with the demonstration's
  // expert_continuation (entry i = state after i+1 steps past handoff).
  std::vector<ContinuationPoint> ego_trace;
  TerminationCause cause = TerminationCause::Horizon;
};

// Continues a demonstration past its handoff scene. The ego follows `policy`
// (or resumes expert control when policy is null); surrounding vehicles keep
// driving under their recorded expert parameters. In train mode the rollout
// ends at the step whose post-state triggers any ego event; in eval mode it
// always runs the full horizon. rng may be null only when the ego action is
// deterministic (expert ego or stochastic=false).
RolloutResult run_rollout(const TrackGeometry& track, const SimParams& sim,
                          const ObsStandardization& obsstd, const SteerGains& gains,
                          const Demonstration& demo, const Policy* policy,
                          const RolloutSpec& spec, Rng* rng);

}  // namespace burngail
