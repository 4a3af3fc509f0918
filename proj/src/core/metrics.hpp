#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "core/dataset.hpp"
#include "core/models.hpp"
#include "core/rollout.hpp"

namespace burngail {

struct AmiResult {
  double score = 0.0;
  bool degenerate = false;  // both partitions trivial: score defined as 0
};

// Burn-in (obs, action) pairs of one demonstration as Eigen vectors, the form
// the style reader consumes.
void demo_burn_in_vectors(const Demonstration& demo, std::vector<Eigen::VectorXd>& obs,
                          std::vector<Eigen::VectorXd>& actions);

// Shortest-round-trip decimal formatting shared by all CSV writers.
std::string csv_double(double v);

// Adjusted mutual information between two labelings:
//   AMI = (MI − E[MI]) / (max(H_a, H_b) − E[MI])
// with E[MI] the exact expectation under the fixed-marginal permutation
// model, evaluated by summing the hypergeometric support with log-factorial
// tables (no sampling). Symmetric, label-permutation invariant, 1 exactly for
// identical non-trivial partitions.
AmiResult adjusted_mutual_information(const std::vector<int>& labels_a,
                                      const std::vector<int>& labels_b);

struct KmeansResult {
  std::vector<int> labels;
  Eigen::MatrixXd centroids;  // k x d
  double wcss = 0.0;          // within-cluster sum of squared distances
};

// Lloyd's algorithm with distance-weighted seeding, best of `restarts` runs
// by WCSS. A cluster that empties is reseeded to the point farthest from its
// assigned centroid. Points are rows.
KmeansResult kmeans_cluster(const Eigen::MatrixXd& points, int k, uint64_t seed,
                            int restarts, int max_iters = 100);

// Demonstration-level labels: every burn-in (obs, action) pair of every demo,
// flattened and standardized per feature, clustered with k-means; each demo
// takes the majority label of its own pairs (ties toward the lower label).
std::vector<int> kmeans_demo_labels(const std::vector<Demonstration>& demos, int k,
                                    uint64_t seed, int restarts);

// Demonstration-level labels via the style reader's trajectory vote.
std::vector<int> inference_demo_labels(const InferenceNet& net,
                                       const std::vector<Demonstration>& demos);

std::vector<int> true_demo_labels(const std::vector<Demonstration>& demos);

// AMI of the style reader's votes against the hidden style classes.
AmiResult validation_ami(const InferenceNet& net, const std::vector<Demonstration>& demos);

// How the ego's style code is chosen at evaluation time.
enum class CodeMode {
  BurnInference,  // majority vote of the style reader over the burn-in
  Uniform,        // uniform random draw per rollout
  None,           // sentinel code (zero embedding)
};

CodeMode code_mode_for(const std::string& algorithm);

struct RmseCurves {
  std::vector<double> speed;  // index t = RMSE after t steps; entry 0 is 0
  std::vector<double> pos;
  int n_rollouts = 0;
  bool resampled = false;  // n_rollouts exceeded the dataset → drew with replacement
};

// Plays the policy (expert playback when null) from sampled validation
// handoffs in eval mode with deterministic actions, and accumulates RMSE of
// speed and global position against each demonstration's recorded expert
// continuation. Curves have horizon+1 entries; entry 0 is exactly 0 (shared
// handoff state). Byte-identical results for any worker count.
RmseCurves rmse_eval(const TrackGeometry& track, const SimParams& sim,
                     const ObsStandardization& obsstd, const SteerGains& gains,
                     const Policy* policy, const InferenceNet* inference,
                     const std::vector<Demonstration>& demos, int n_rollouts, int horizon,
                     CodeMode mode, uint64_t seed, int workers);

struct EventFractions {
  double offroad = 0.0;
  double collision = 0.0;
  double reversal = 0.0;
};

// Fraction of evaluation timesteps with each event active, over n_rollouts
// eval-mode rollouts of `horizon` steps (no early termination).
EventFractions event_frequencies(const TrackGeometry& track, const SimParams& sim,
                                 const ObsStandardization& obsstd, const SteerGains& gains,
                                 const Policy* policy, const InferenceNet* inference,
                                 const std::vector<Demonstration>& demos, int n_rollouts,
                                 int horizon, CodeMode mode, uint64_t seed, int workers);

// ---- Artifact writers ----

void write_rmse_csv(const std::string& path, const RmseCurves& curves);
void write_events_csv(const std::string& path, const EventFractions& events);

struct AmiRow {
  std::string method;
  std::string split;
  double ami = 0.0;
};
void write_ami_csv(const std::string& path, const std::vector<AmiRow>& rows);

// The 4x16 style-embedding matrix, one row per code.
void write_embedding_csv(const std::string& path, const Policy& policy);

// Deterministic rollouts from `trials_per_code` sampled demos, once per
// forced code, as JSON lines (trial, code, step, x, y, v). Step 0 is the
// handoff pose.
void write_trajectories_jsonl(const std::string& path, const TrackGeometry& track,
                              const SimParams& sim, const ObsStandardization& obsstd,
                              const SteerGains& gains, const Policy& policy,
                              const std::vector<Demonstration>& demos, int trials_per_code,
                              int horizon, uint64_t seed);

}  // namespace burngail
