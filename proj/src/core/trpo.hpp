#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "core/config.hpp"
#include "core/models.hpp"

namespace burngail {

// One step of policy experience. `done` marks the last step of a trajectory
// (early termination or horizon); `action` is the raw sampled action, before
// any simulator clamping, so stored log-probabilities stay consistent.
struct PolicyStep {
  Eigen::VectorXd obs;
  LatentCode code;
  Eigen::VectorXd action;
  double reward = 0.0;
  bool done = false;
};

struct AdvantageBatch {
  std::vector<double> returns;     // discounted reward-to-go per step
  std::vector<double> advantages;  // baseline-subtracted, normalized
};

// Discounted returns within each trajectory, minus a baseline, normalized to
// mean 0 / std 1 (when the spread exceeds 1e-8). baseline is "linear"
// (least-squares on [obs, obs², t, t², t³, 1] with t = step/100, ridge 1e-8,
// fit on this batch before subtraction) or "none".
AdvantageBatch compute_advantages(const std::vector<PolicyStep>& steps, double gamma,
                                  const std::string& baseline);

// Policy forward passes cached at the current (old) parameters, reused by
// every Fisher-vector product during conjugate gradient.
struct PolicyLinearization {
  std::vector<Policy::Cache> caches;
  std::vector<Eigen::VectorXd> mean;
  Eigen::VectorXd sigma;      // old per-dimension σ
  Eigen::VectorXd log_sigma;  // old log σ
};

PolicyLinearization linearize_policy(const Policy& policy,
                                     const std::vector<PolicyStep>& steps);

// (F + damping·I)·v for the mean KL between the frozen policy and itself at
// the linearization point. Block structure of the diagonal-Gaussian KL
// Hessian: Gauss-Newton Jᵀ diag(1/σ²) J over the mean parameters, 2·I over
// the log σ block, zero cross terms.
Eigen::VectorXd fisher_vector_product(const Policy& policy,
                                      const PolicyLinearization& lin,
                                      const Eigen::VectorXd& v, double damping);

struct CgResult {
  Eigen::VectorXd x;
  double residual = 0.0;  // ‖A·x − b‖ at exit
  int iterations = 0;
};

// Standard conjugate gradient for SPD operators. Stops when the residual
// drops below tol·‖b‖ or after `iters` rounds. Faults on non-finite values
// (a sign the operator is broken or the system diverged).
CgResult conjugate_gradient(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& apply_A,
    const Eigen::VectorXd& b, int iters, double tol);

struct TrpoDiagnostics {
  double kl = 0.0;                // measured mean KL of the accepted step
  double surrogate_before = 0.0;  // mean(ratio·advantage) at old params
  double surrogate_after = 0.0;   // same at accepted params
  double cg_residual = 0.0;
  int backtrack_steps = 0;  // shrink count of the accepted candidate
  bool accepted = false;    // false → parameters left unchanged
};

// One KL-constrained natural-gradient step on the surrogate objective
// mean(exp(logp_new − logp_old)·advantage). The step direction solves
// F·s = g by CG, is scaled so the quadratic KL model equals max_kl, and
// backtracks geometrically until measured KL ≤ max_kl and the surrogate does
// not decrease. Exhausting the line search leaves the policy unchanged.
TrpoDiagnostics trpo_step(Policy& policy, const std::vector<PolicyStep>& steps,
                          const std::vector<double>& advantages,
                          const TrpoSettings& cfg);

}  // namespace burngail
