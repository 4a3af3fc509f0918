#include "core/models.hpp"

#include <array>
#include <cmath>

#include "core/errors.hpp"

namespace burngail {

LatentCode LatentCode::of(int cls) {
  if (cls < 0 || cls >= kCodeDim) throw ConfigError("LatentCode: class out of range");
  return LatentCode{cls};
}

Eigen::VectorXd LatentCode::one_hot() const {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(kCodeDim);
  if (cls >= 0) {
    if (cls >= kCodeDim) throw ConfigError("LatentCode: class out of range");
    v[cls] = 1.0;
  }
  return v;
}

Policy::Policy(int obs_dim, int trunk_hidden, int embed_dim, int head_hidden,
               double sigma_init)
    : trunk_({{obs_dim, trunk_hidden, Activation::Tanh, true}}),
      head_({{trunk_hidden + embed_dim, head_hidden, Activation::Tanh, true},
             {head_hidden, kActionDim, Activation::Identity, true}}),
      embed_dim_(embed_dim),
      sigma_init_(sigma_init) {
  if (embed_dim <= 0) throw ConfigError("Policy: embed_dim must be positive");
  if (sigma_init <= 0.0) throw ConfigError("Policy: sigma_init must be positive");
  trunk_off_ = 0;
  embed_off_ = trunk_.param_count();
  head_off_ = embed_off_ + embed_dim_ * kCodeDim;
  log_sigma_off_ = head_off_ + head_.param_count();
  count_ = log_sigma_off_ + kActionDim;
  params_ = Eigen::VectorXd::Zero(count_);
}

std::vector<NamedSegment> Policy::segments() const {
  return {{"policy.trunk", trunk_off_, trunk_.param_count()},
          {"policy.embed", embed_off_, embed_dim_ * kCodeDim},
          {"policy.head", head_off_, head_.param_count()},
          {"policy.log_sigma", log_sigma_off_, kActionDim}};
}

void Policy::init(Rng& rng) {
  trunk_.init_params(params_.segment(trunk_off_, trunk_.param_count()), rng);
  double bound = std::sqrt(6.0 / (kCodeDim + embed_dim_));
  for (int i = 0; i < embed_dim_ * kCodeDim; ++i)
    params_[embed_off_ + i] = rng.uniform(-bound, bound);
  head_.init_params(params_.segment(head_off_, head_.param_count()), rng);
  params_.segment(log_sigma_off_, kActionDim).setConstant(std::log(sigma_init_));
}

Eigen::VectorXd Policy::mean(const Eigen::VectorXd& obs, const LatentCode& code,
                             Cache* cache) const {
  if (!obs.allFinite()) throw RuntimeFault("Policy::mean: non-finite observation");
  Cache local;
  Cache& c = cache ? *cache : local;
  c.one_hot = code.one_hot();
  Eigen::VectorXd trunk_out =
      trunk_.forward(params_.segment(trunk_off_, trunk_.param_count()), obs, &c.trunk);
  Eigen::Map<const Eigen::MatrixXd> E(params_.data() + embed_off_, embed_dim_, kCodeDim);
  Eigen::VectorXd head_in(trunk_out.size() + embed_dim_);
  head_in << trunk_out, E * c.one_hot;
  return head_.forward(params_.segment(head_off_, head_.param_count()), head_in, &c.head);
}

Eigen::VectorXd Policy::log_sigma() const {
  return params_.segment(log_sigma_off_, kActionDim);
}

Eigen::VectorXd Policy::sigma() const { return log_sigma().array().exp(); }

Eigen::VectorXd Policy::embedding(int cls) const {
  if (cls < 0 || cls >= kCodeDim) throw ConfigError("Policy::embedding: class out of range");
  Eigen::Map<const Eigen::MatrixXd> E(params_.data() + embed_off_, embed_dim_, kCodeDim);
  return E.col(cls);
}

Action Policy::act(const Eigen::VectorXd& obs, const LatentCode& code, bool deterministic,
                   Rng* rng) const {
  Eigen::VectorXd mu = mean(obs, code);
  if (deterministic) return Action{mu[0], mu[1]};
  if (!rng) throw RuntimeFault("Policy::act: stochastic mode needs an rng");
  Eigen::VectorXd s = sigma();
  return Action{mu[0] + s[0] * rng->normal(), mu[1] + s[1] * rng->normal()};
}

void Policy::accumulate_mean_grad(const Cache& cache, const Eigen::VectorXd& dmean,
                                  Eigen::Ref<Eigen::VectorXd> grad) const {
  if (grad.size() != count_) throw RuntimeFault("Policy gradient buffer size mismatch");
  Eigen::VectorXd head_in_grad =
      head_.backward(params_.segment(head_off_, head_.param_count()), cache.head, dmean,
                     grad.segment(head_off_, head_.param_count()));
  int trunk_out = trunk_.output_dim();
  trunk_.backward(params_.segment(trunk_off_, trunk_.param_count()), cache.trunk,
                  head_in_grad.head(trunk_out), grad.segment(trunk_off_, trunk_.param_count()));
  // Embedding is linear in the one-hot: dE = g_embed ⊗ one_hot (column cls).
  Eigen::Map<Eigen::MatrixXd> dE(grad.data() + embed_off_, embed_dim_, kCodeDim);
  dE += head_in_grad.tail(embed_dim_) * cache.one_hot.transpose();
}

void Policy::accumulate_log_sigma_grad(const Eigen::VectorXd& dlogsig,
                                       Eigen::Ref<Eigen::VectorXd> grad) const {
  if (dlogsig.size() != kActionDim || grad.size() != count_)
    throw RuntimeFault("Policy log_sigma gradient size mismatch");
  grad.segment(log_sigma_off_, kActionDim) += dlogsig;
}

Eigen::VectorXd Policy::mean_jvp(const Cache& cache, const Eigen::VectorXd& v) const {
  if (v.size() != count_) throw RuntimeFault("Policy::mean_jvp: direction size mismatch");
  Eigen::VectorXd dtrunk_out =
      trunk_.jvp_params(params_.segment(trunk_off_, trunk_.param_count()), cache.trunk,
                        v.segment(trunk_off_, trunk_.param_count()));
  Eigen::Map<const Eigen::MatrixXd> dE(v.data() + embed_off_, embed_dim_, kCodeDim);
  Eigen::VectorXd dhead_in(dtrunk_out.size() + embed_dim_);
  dhead_in << dtrunk_out, dE * cache.one_hot;
  return head_.jvp_params(params_.segment(head_off_, head_.param_count()), cache.head,
                          v.segment(head_off_, head_.param_count()), &dhead_in);
}

Eigen::VectorXd Policy::log_sigma_of(const Eigen::VectorXd& v) const {
  if (v.size() != count_) throw RuntimeFault("Policy::log_sigma_of: size mismatch");
  return v.segment(log_sigma_off_, kActionDim);
}

Critic::Critic(int obs_dim, int hidden)
    : net_({{obs_dim + kActionDim, hidden, Activation::Tanh, true},
            {hidden, hidden, Activation::Tanh, true},
            {hidden, 1, Activation::Identity, true}}) {
  params_ = Eigen::VectorXd::Zero(net_.param_count());
}

std::vector<NamedSegment> Critic::segments() const {
  return {{"critic.net", 0, net_.param_count()}};
}

void Critic::init(Rng& rng) { net_.init_params(params_, rng); }

double Critic::score(const Eigen::VectorXd& obs, const Eigen::VectorXd& action,
                     Mlp::Cache* cache) const {
  Eigen::VectorXd in(obs.size() + action.size());
  in << obs, action;
  return net_.forward(params_, in, cache)[0];
}

void Critic::accumulate_grad(const Mlp::Cache& cache, double upstream,
                             Eigen::Ref<Eigen::VectorXd> grad) const {
  Eigen::VectorXd g(1);
  g << upstream;
  net_.backward(params_, cache, g, grad);
}

InferenceNet::InferenceNet(int obs_dim, int hidden)
    : net_({{obs_dim + kActionDim, hidden, Activation::Tanh, true},
            {hidden, hidden, Activation::Tanh, true},
            {hidden, kCodeDim, Activation::Identity, true}}) {
  params_ = Eigen::VectorXd::Zero(net_.param_count());
}

std::vector<NamedSegment> InferenceNet::segments() const {
  return {{"inference.net", 0, net_.param_count()}};
}

void InferenceNet::init(Rng& rng) { net_.init_params(params_, rng); }

Eigen::VectorXd InferenceNet::logits(const Eigen::VectorXd& obs,
                                     const Eigen::VectorXd& action,
                                     Mlp::Cache* cache) const {
  Eigen::VectorXd in(obs.size() + action.size());
  in << obs, action;
  return net_.forward(params_, in, cache);
}

Eigen::VectorXd InferenceNet::posterior(const Eigen::VectorXd& obs,
                                        const Eigen::VectorXd& action,
                                        Mlp::Cache* cache) const {
  return softmax(logits(obs, action, cache));
}

void InferenceNet::accumulate_grad(const Mlp::Cache& cache, const Eigen::VectorXd& dlogits,
                                   Eigen::Ref<Eigen::VectorXd> grad) const {
  net_.backward(params_, cache, dlogits, grad);
}

TrajectoryInference infer_trajectory(const InferenceNet& net,
                                     const std::vector<Eigen::VectorXd>& obs,
                                     const std::vector<Eigen::VectorXd>& actions) {
  if (obs.empty() || obs.size() != actions.size())
    throw RuntimeFault("infer_trajectory: empty or misaligned trajectory");
  Eigen::VectorXd avg = Eigen::VectorXd::Zero(kCodeDim);
  std::array<int, kCodeDim> votes{};
  for (size_t i = 0; i < obs.size(); ++i) {
    Eigen::VectorXd p = net.posterior(obs[i], actions[i]);
    avg += p;
    int arg = 0;
    p.maxCoeff(&arg);
    votes[arg] += 1;
  }
  avg /= static_cast<double>(obs.size());

  TrajectoryInference out;
  out.avg_posterior = avg;
  int best = 0;
  for (int c = 1; c < kCodeDim; ++c) {
    if (votes[c] > votes[best]) {
      best = c;
    } else if (votes[c] == votes[best] && avg[c] > avg[best]) {
      // Tie on vote count: prefer the class the averaged posterior favors;
      // a further tie keeps the lower index.
      best = c;
    }
  }
  out.vote_label = best;
  return out;
}

}  // namespace burngail
