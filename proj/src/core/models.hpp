#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "core/nn.hpp"
#include "core/scene.hpp"

namespace burngail {

inline constexpr int kActionDim = 2;
inline constexpr int kCodeDim = 4;

// Discrete style code fed to the policy as a one-hot vector. The sentinel
// (class -1) encodes "no style conditioning": a zero vector, giving zero
// embedding contribution.
struct LatentCode {
  int cls = -1;

  static LatentCode sentinel() { return LatentCode{-1}; }
  static LatentCode of(int cls);
  bool is_sentinel() const { return cls < 0; }
  Eigen::VectorXd one_hot() const;
};

// Named view into a flat parameter vector, used for checkpointing.
struct NamedSegment {
  std::string name;
  int offset = 0;
  int size = 0;
};

// Gaussian policy π(a | obs, code): a trunk MLP reads the observation, the
// code enters through a learned linear (bias-free) embedding concatenated
// onto the trunk output, and a head MLP produces the action mean. A trainable
// per-dimension log σ completes the distribution. All parameters live in one
// flat vector: [trunk | embedding (16x4) | head | log_sigma].
class Policy {
 public:
  Policy() = default;
  Policy(int obs_dim, int trunk_hidden, int embed_dim, int head_hidden,
         double sigma_init);

  int param_count() const { return count_; }
  int obs_dim() const { return trunk_.input_dim(); }
  int embed_dim() const { return embed_dim_; }
  Eigen::VectorXd& params() { return params_; }
  const Eigen::VectorXd& params() const { return params_; }
  std::vector<NamedSegment> segments() const;

  void init(Rng& rng);

  // Forward caches at one (obs, code) point; reusable by the gradient and
  // jvp passes below, which all linearize at the cached point.
  struct Cache {
    Mlp::Cache trunk;
    Mlp::Cache head;
    Eigen::VectorXd one_hot;
  };

  Eigen::VectorXd mean(const Eigen::VectorXd& obs, const LatentCode& code,
                       Cache* cache = nullptr) const;
  Eigen::VectorXd sigma() const;
  Eigen::VectorXd log_sigma() const;

  // Embedding column for a class (16-vector), for artifact export.
  Eigen::VectorXd embedding(int cls) const;

  // Stochastic sample (or the mean when deterministic). Faults on non-finite
  // observations. rng may be null only in deterministic mode.
  Action act(const Eigen::VectorXd& obs, const LatentCode& code, bool deterministic,
             Rng* rng) const;

  // grad += dL/dparams given dL/dmean at the cached point.
  void accumulate_mean_grad(const Cache& cache, const Eigen::VectorXd& dmean,
                            Eigen::Ref<Eigen::VectorXd> grad) const;
  // grad += dL/dlog_sigma.
  void accumulate_log_sigma_grad(const Eigen::VectorXd& dlogsig,
                                 Eigen::Ref<Eigen::VectorXd> grad) const;
  // Directional derivative of the mean along parameter direction v.
  Eigen::VectorXd mean_jvp(const Cache& cache, const Eigen::VectorXd& v) const;
  // Extracts the log_sigma block of a parameter-space direction.
  Eigen::VectorXd log_sigma_of(const Eigen::VectorXd& v) const;

 private:
  Mlp trunk_;
  Mlp head_;
  int embed_dim_ = 0;
  int trunk_off_ = 0, embed_off_ = 0, head_off_ = 0, log_sigma_off_ = 0;
  int count_ = 0;
  double sigma_init_ = 0.5;
  Eigen::VectorXd params_;
};

// Wasserstein critic: scalar score over an (obs, action) pair; unbounded
// output (a score, not a probability).
class Critic {
 public:
  Critic() = default;
  Critic(int obs_dim, int hidden);

  int param_count() const { return net_.param_count(); }
  Eigen::VectorXd& params() { return params_; }
  const Eigen::VectorXd& params() const { return params_; }
  std::vector<NamedSegment> segments() const;

  void init(Rng& rng);

  double score(const Eigen::VectorXd& obs, const Eigen::VectorXd& action,
               Mlp::Cache* cache = nullptr) const;
  // grad += dscore/dparams · upstream at the cached point.
  void accumulate_grad(const Mlp::Cache& cache, double upstream,
                       Eigen::Ref<Eigen::VectorXd> grad) const;

 private:
  Mlp net_;
  Eigen::VectorXd params_;
};

// Inference net Q(z | obs, action): 4-way classifier over style codes.
class InferenceNet {
 public:
  InferenceNet() = default;
  InferenceNet(int obs_dim, int hidden);

  int param_count() const { return net_.param_count(); }
  Eigen::VectorXd& params() { return params_; }
  const Eigen::VectorXd& params() const { return params_; }
  std::vector<NamedSegment> segments() const;

  void init(Rng& rng);

  Eigen::VectorXd logits(const Eigen::VectorXd& obs, const Eigen::VectorXd& action,
                         Mlp::Cache* cache = nullptr) const;
  Eigen::VectorXd posterior(const Eigen::VectorXd& obs, const Eigen::VectorXd& action,
                            Mlp::Cache* cache = nullptr) const;
  // grad += (dL/dlogits)ᵀ · dlogits/dparams at the cached point.
  void accumulate_grad(const Mlp::Cache& cache, const Eigen::VectorXd& dlogits,
                       Eigen::Ref<Eigen::VectorXd> grad) const;

 private:
  Mlp net_;
  Eigen::VectorXd params_;
};

// Always-positive reward shaped from the critic score.
inline double surrogate_reward(double score) { return stable_softplus(score); }

struct TrajectoryInference {
  Eigen::VectorXd avg_posterior;  // mean of per-pair posteriors
  int vote_label = 0;             // most frequent per-pair argmax
};

// Trajectory-level style inference over (obs, action) pairs. Vote ties break
// by the averaged posterior, then by lowest class index. Faults on an empty
// trajectory.
TrajectoryInference infer_trajectory(const InferenceNet& net,
                                     const std::vector<Eigen::VectorXd>& obs,
                                     const std::vector<Eigen::VectorXd>& actions);

}  // namespace burngail
