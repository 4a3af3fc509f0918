#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "core/checkpoint.hpp"
#include "core/config.hpp"
#include "core/dataset.hpp"
#include "core/models.hpp"
#include "core/nn.hpp"
#include "core/rng.hpp"

namespace burngail {

// One (observation, action) pair in the form the critic and the style reader
// consume: the action is the one actually applied to the scene.
struct ObsActPair {
  Eigen::VectorXd obs;
  Eigen::VectorXd action;
};

// Draws the ego style code for one training rollout.
//   burn_infogail: from the style reader's burn-in posterior — "sampled"
//     draws from the averaged posterior, "vote" takes the majority label.
//   infogail:      uniform over the codes; the burn-in is ignored.
//   gail:          the sentinel (no conditioning; the reader is not consulted,
//                  and may be null).
LatentCode draw_code(const std::string& algorithm, const std::string& code_mode,
                     const InferenceNet* inference, const Demonstration& demo, Rng& rng);

// One critic update: a momentum-free RMSProp descent step on
//   W = mean score(policy pairs) − mean score(expert pairs)
// followed by clipping every weight to [−clip_c, clip_c]. Driving W down
// pushes expert scores above policy scores. Returns W as measured before the
// step. Empty minibatches fault; a non-finite objective faults.
double critic_update(Critic& critic, std::span<const ObsActPair> expert_pairs,
                     std::span<const ObsActPair> policy_pairs, RmsPropState& opt,
                     double clip_c);

struct InferenceUpdateResult {
  double ce = 0.0;       // mean cross-entropy over the rollout pairs
  double entropy = 0.0;  // entropy of the demo-averaged burn-in posterior
};

// One Adam step on the style-reader loss C − λ·H, where
//   C = mean over rollout pairs of −log q(code | obs, action), the code being
//       the one the trajectory was conditioned on, and
//   H = entropy of the posterior averaged per demo and then across the
//       entropy minibatch (pushing H up spreads predictions across codes so
//       the classifier cannot collapse onto one label).
// entropy_demos may be empty, which skips the H term (reported as 0).
InferenceUpdateResult inference_update(InferenceNet& net, std::span<const ObsActPair> pairs,
                                       std::span<const int> codes,
                                       const std::vector<const Demonstration*>& entropy_demos,
                                       double lambda, AdamState& opt);

// Per-step reward handed to the policy optimizer: softplus of the critic
// score (always positive, so living longer is always better), plus
// η·log q(code) rewarding behavior the style reader can recognize. q is
// floored at 1e-8. Pass eta = 0 to drop the style term.
double composite_reward(double score, double posterior, double eta);

struct TrainResult {
  int64_t iterations_run = 0;    // iterations executed by this call
  int64_t total_iterations = 0;  // configured total, including resumed ones
  double best_val_ami = -2.0;    // best validation AMI seen at any checkpoint
  std::string final_checkpoint;  // numbered checkpoint at the final iteration
};

// Highest numbered checkpoint (ckpt_NNNNNN.bgc) in a checkpoints directory,
// or "" when none exists. best.bgc and halt.bgc never count.
std::string find_latest_checkpoint(const std::string& checkpoints_dir);

// Runs the adversarial training loop to cfg.trainer.iterations. Each
// iteration samples demonstrations and codes, collects on-policy rollouts up
// to the step budget, takes the critic updates, one style-reader update
// (skipped entirely for gail), and one trust-region policy step on the
// composite rewards. Appends one row per iteration to run_dir/metrics.csv and
// writes run_dir/checkpoints/ckpt_NNNNNN.bgc every checkpoint_every
// iterations and at the end; best.bgc tracks the best validation AMI. If a
// numbered checkpoint already exists under run_dir the run resumes after it
// (metrics rows past it are dropped), and results are byte-identical to an
// uninterrupted run. A fault mid-iteration writes halt.bgc and rethrows.
// Results do not depend on cfg.workers.
TrainResult train_run(const RunConfig& cfg, const std::vector<Demonstration>& train_demos,
                      const std::vector<Demonstration>& val_demos);

}  // namespace burngail
