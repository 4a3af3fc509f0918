#include "core/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <thread>
#include <utility>

#include "core/errors.hpp"
#include "core/metrics.hpp"
#include "core/rollout.hpp"
#include "core/trpo.hpp"

namespace burngail {

namespace fs = std::filesystem;

namespace {

constexpr const char* kMetricsHeader =
    "iter,wasserstein,ce,entropy,mean_return,freq_z0,freq_z1,freq_z2,freq_z3,"
    "train_ami,kl,surrogate_before,surrogate_after,cg_residual,backtrack_steps";

std::string checkpoint_name(int64_t iteration) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "ckpt_%06lld.bgc", static_cast<long long>(iteration));
  return buf;
}

// Highest numbered checkpoint under dir, or empty when none exists. Only
// exact ckpt_NNNNNN.bgc names count; best.bgc / halt.bgc are never resumed.
fs::path latest_checkpoint(const fs::path& dir) {
  int64_t best = -1;
  fs::path best_path;
  if (!fs::is_directory(dir)) return best_path;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    long long v = -1;
    if (std::sscanf(name.c_str(), "ckpt_%lld.bgc", &v) == 1 && v >= 0 &&
        name == checkpoint_name(v) && v > best) {
      best = v;
      best_path = entry.path();
    }
  }
  return best_path;
}

// Rewrites metrics.csv to the header plus the rows at or before `iteration`,
// so an appended continuation lines up with the checkpoint being resumed.
void reset_metrics_file(const fs::path& path, int64_t iteration) {
  std::string kept = std::string(kMetricsHeader) + "\n";
  if (iteration > 0) {
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line == kMetricsHeader) continue;
      errno = 0;
      char* end = nullptr;
      long long iter = std::strtoll(line.c_str(), &end, 10);
      if (end == line.c_str() || *end != ',' || errno != 0) continue;
      if (iter <= iteration) kept += line + "\n";
    }
  }
  std::ofstream out(path, std::ios::trunc);
  out << kept;
  if (!out) throw RuntimeFault("training: cannot write " + path.string());
}

Eigen::VectorXd obs_vector(const Observation& obs) {
  return Eigen::Map<const Eigen::VectorXd>(obs.data(), static_cast<long>(obs.size()));
}

Eigen::VectorXd action_vector(const Action& a) {
  Eigen::Vector2d v(a.accel, a.turn_rate);
  return v;
}

}  // namespace

LatentCode draw_code(const std::string& algorithm, const std::string& code_mode,
                     const InferenceNet* inference, const Demonstration& demo, Rng& rng) {
  if (algorithm == "gail") return LatentCode::sentinel();
  if (algorithm == "infogail") return LatentCode::of(rng.uniform_int(kCodeDim));
  if (algorithm == "burn_infogail") {
    if (!inference)
      throw RuntimeFault("code draw: burn-in conditioning needs the style reader");
    std::vector<Eigen::VectorXd> obs, actions;
    demo_burn_in_vectors(demo, obs, actions);
    TrajectoryInference ti = infer_trajectory(*inference, obs, actions);
    if (code_mode == "vote") return LatentCode::of(ti.vote_label);
    if (code_mode == "sampled") {
      std::span<const double> w(ti.avg_posterior.data(),
                                static_cast<size_t>(ti.avg_posterior.size()));
      return LatentCode::of(rng.categorical(w));
    }
    throw ConfigError("trainer.code_mode must be sampled | vote, got \"" + code_mode + "\"");
  }
  throw ConfigError("trainer.algorithm must be gail | infogail | burn_infogail, got \"" +
                    algorithm + "\"");
}

double critic_update(Critic& critic, std::span<const ObsActPair> expert_pairs,
                     std::span<const ObsActPair> policy_pairs, RmsPropState& opt,
                     double clip_c) {
  if (expert_pairs.empty() || policy_pairs.empty())
    throw RuntimeFault("critic update: empty minibatch");
  if (clip_c <= 0.0) throw ConfigError("critic update: clip_c must be > 0");

  Eigen::VectorXd grad = Eigen::VectorXd::Zero(critic.param_count());
  double mean_policy = 0.0, mean_expert = 0.0;
  const double inv_p = 1.0 / static_cast<double>(policy_pairs.size());
  const double inv_e = 1.0 / static_cast<double>(expert_pairs.size());
  Mlp::Cache cache;
  for (const ObsActPair& pair : policy_pairs) {
    mean_policy += inv_p * critic.score(pair.obs, pair.action, &cache);
    critic.accumulate_grad(cache, inv_p, grad);
  }
  for (const ObsActPair& pair : expert_pairs) {
    mean_expert += inv_e * critic.score(pair.obs, pair.action, &cache);
    critic.accumulate_grad(cache, -inv_e, grad);
  }
  const double w = mean_policy - mean_expert;
  if (!std::isfinite(w)) throw RuntimeFault("critic update: non-finite objective");
  rmsprop_step(opt, critic.params(), grad);
  clip_weights(critic.params(), clip_c);
  return w;
}

InferenceUpdateResult inference_update(InferenceNet& net, std::span<const ObsActPair> pairs,
                                       std::span<const int> codes,
                                       const std::vector<const Demonstration*>& entropy_demos,
                                       double lambda, AdamState& opt) {
  if (pairs.empty()) throw RuntimeFault("style-reader update: empty pair minibatch");
  if (pairs.size() != codes.size())
    throw RuntimeFault("style-reader update: pairs and codes misaligned");

  Eigen::VectorXd grad = Eigen::VectorXd::Zero(net.param_count());
  InferenceUpdateResult result;

  // Classification term: mean −log q(code | obs, action).
  const double inv_n = 1.0 / static_cast<double>(pairs.size());
  Mlp::Cache cache;
  for (size_t i = 0; i < pairs.size(); ++i) {
    const int label = codes[i];
    if (label < 0 || label >= kCodeDim)
      throw RuntimeFault("style-reader update: code out of range");
    Eigen::VectorXd p = softmax(net.logits(pairs[i].obs, pairs[i].action, &cache));
    result.ce += inv_n * cross_entropy(p, label);
    Eigen::VectorXd dlogits = inv_n * p;
    dlogits[label] -= inv_n;
    net.accumulate_grad(cache, dlogits, grad);
  }

  // Entropy term over the burn-in minibatch. Each demo contributes its
  // per-pair posteriors averaged over its own burn-in; those demo averages
  // are averaged again into p̄, and H = entropy(p̄). The gradient flows back
  // through every pair: with u_k = −(log p̄_k + 1),
  //   dH/dlogits = (1 / (M·T_m)) · (p ⊙ u − p·(pᵀu)).
  if (!entropy_demos.empty()) {
    const double inv_m = 1.0 / static_cast<double>(entropy_demos.size());
    std::vector<std::vector<Mlp::Cache>> caches(entropy_demos.size());
    std::vector<std::vector<Eigen::VectorXd>> posts(entropy_demos.size());
    Eigen::VectorXd pbar = Eigen::VectorXd::Zero(kCodeDim);
    std::vector<Eigen::VectorXd> obs, actions;
    for (size_t m = 0; m < entropy_demos.size(); ++m) {
      demo_burn_in_vectors(*entropy_demos[m], obs, actions);
      if (obs.empty())
        throw RuntimeFault("style-reader update: entropy demo without burn-in pairs");
      caches[m].resize(obs.size());
      posts[m].resize(obs.size());
      Eigen::VectorXd avg = Eigen::VectorXd::Zero(kCodeDim);
      for (size_t t = 0; t < obs.size(); ++t) {
        posts[m][t] = softmax(net.logits(obs[t], actions[t], &caches[m][t]));
        avg += posts[m][t];
      }
      pbar += (inv_m / static_cast<double>(obs.size())) * avg;
    }
    result.entropy = entropy(pbar);
    if (lambda != 0.0) {
      const Eigen::VectorXd u = -(pbar.array().log() + 1.0).matrix();
      for (size_t m = 0; m < entropy_demos.size(); ++m) {
        const double coef = -lambda * inv_m / static_cast<double>(posts[m].size());
        for (size_t t = 0; t < posts[m].size(); ++t) {
          const Eigen::VectorXd& p = posts[m][t];
          Eigen::VectorXd dlogits = coef * (p.cwiseProduct(u) - p * p.dot(u));
          net.accumulate_grad(caches[m][t], dlogits, grad);
        }
      }
    }
  }

  adam_step(opt, net.params(), grad);
  return result;
}

double composite_reward(double score, double posterior, double eta) {
  double r = stable_softplus(score);
  if (eta != 0.0) r += eta * std::log(std::max(posterior, 1e-8));
  return r;
}

std::string find_latest_checkpoint(const std::string& checkpoints_dir) {
  return latest_checkpoint(checkpoints_dir).string();
}

namespace {

// Everything one training iteration collects before the model updates.
struct RolloutBatch {
  std::vector<PolicyStep> steps;      // flattened, done = trajectory end
  std::vector<ObsActPair> pairs;      // applied (clamped) actions, step-aligned
  std::vector<int> step_codes;        // trajectory code per step (−1 for gail)
  std::vector<int> traj_start;        // first step index of each trajectory
  std::vector<LatentCode> traj_code;  // code per trajectory
};

// Collects stochastic on-policy rollouts until the step budget is met.
// Trajectory slot k is fully determined by derive_seed(seed, "train_rollout",
// iter, k) — its demo draw, code draw, and action noise — so the kept batch
// (the minimal slot prefix reaching the budget) is identical for any worker
// count; slots computed speculatively past the budget are discarded.
RolloutBatch collect_rollouts(const RunConfig& cfg, const TrackGeometry& track,
                              const SimParams& sim, const ObsStandardization& obsstd,
                              const SteerGains& gains, const ModelBundle& bundle,
                              const std::vector<Demonstration>& demos, bool is_gail,
                              int64_t iter) {
  const TrainerConfig& tc = cfg.trainer;
  const int n_demos = static_cast<int>(demos.size());
  const InferenceNet* reader = is_gail ? nullptr : &bundle.inference;

  auto run_slot = [&](int slot, RolloutResult& out, LatentCode& code_out) {
    Rng rng(derive_seed(cfg.seed, "train_rollout", static_cast<uint64_t>(iter),
                        static_cast<uint64_t>(slot)));
    const Demonstration& demo = demos[rng.uniform_int(n_demos)];
    code_out = draw_code(tc.algorithm, tc.code_mode, reader, demo, rng);
    RolloutSpec spec;
    spec.horizon = tc.horizon;
    spec.train_mode = true;
    spec.stochastic = true;
    spec.code = code_out;
    out = run_rollout(track, sim, obsstd, gains, demo, &bundle.policy, spec, &rng);
  };

  std::vector<RolloutResult> kept;
  std::vector<LatentCode> kept_codes;
  int64_t steps_total = 0;
  int next_slot = 0;
  const int wave = std::max(1, cfg.workers);
  while (steps_total < tc.rollout_steps) {
    std::vector<RolloutResult> wave_res(wave);
    std::vector<LatentCode> wave_codes(wave);
    std::vector<std::exception_ptr> errors(wave);
    auto work = [&](int w) {
      for (int i = w; i < wave; i += wave) {  // one slot per worker per wave
        try {
          run_slot(next_slot + i, wave_res[i], wave_codes[i]);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    };
    if (wave == 1) {
      work(0);
    } else {
      std::vector<std::thread> pool;
      pool.reserve(wave);
      for (int w = 0; w < wave; ++w) pool.emplace_back(work, w);
      for (auto& th : pool) th.join();
    }
    for (const std::exception_ptr& e : errors)
      if (e) std::rethrow_exception(e);
    for (int i = 0; i < wave && steps_total < tc.rollout_steps; ++i) {
      steps_total += static_cast<int64_t>(wave_res[i].steps.size());
      kept.push_back(std::move(wave_res[i]));
      kept_codes.push_back(wave_codes[i]);
    }
    next_slot += wave;
  }

  RolloutBatch batch;
  batch.steps.reserve(static_cast<size_t>(steps_total));
  batch.pairs.reserve(static_cast<size_t>(steps_total));
  batch.step_codes.reserve(static_cast<size_t>(steps_total));
  for (size_t j = 0; j < kept.size(); ++j) {
    batch.traj_start.push_back(static_cast<int>(batch.steps.size()));
    batch.traj_code.push_back(kept_codes[j]);
    const std::vector<RolloutStep>& steps = kept[j].steps;
    for (size_t s = 0; s < steps.size(); ++s) {
      PolicyStep ps;
      ps.obs = obs_vector(steps[s].obs);
      ps.code = kept_codes[j];
      ps.action = steps[s].action_raw;
      ps.done = (s + 1 == steps.size());
      batch.pairs.push_back(ObsActPair{ps.obs, action_vector(steps[s].action)});
      batch.step_codes.push_back(kept_codes[j].cls);
      batch.steps.push_back(std::move(ps));
    }
  }
  return batch;
}

}  // namespace

TrainResult train_run(const RunConfig& cfg, const std::vector<Demonstration>& train_demos,
                      const std::vector<Demonstration>& val_demos) {
  cfg.validate();
  if (train_demos.empty()) throw ConfigError("training: empty demonstration set");

  const TrainerConfig& tc = cfg.trainer;
  const bool is_gail = tc.algorithm == "gail";
  const TrackGeometry track = cfg.track();
  const SimParams sim = cfg.sim_params();
  const ObsStandardization& obsstd = cfg.simulator.standardization;
  const SteerGains& gains = cfg.experts.steer;

  const fs::path run_dir(cfg.run_dir);
  const fs::path ckpt_dir = run_dir / "checkpoints";
  fs::create_directories(ckpt_dir);
  const fs::path metrics_path = run_dir / "metrics.csv";

  ModelBundle bundle;
  const fs::path resume_path = latest_checkpoint(ckpt_dir);
  if (!resume_path.empty()) {
    bundle = load_bundle(resume_path.string(), cfg);
    if (bundle.iteration > tc.iterations)
      throw ConfigError("training: " + resume_path.filename().string() + " is past " +
                        std::to_string(tc.iterations) + " iterations; raise trainer.iterations "
                        "or start a fresh run directory");
  } else {
    bundle = build_bundle(cfg);
  }
  reset_metrics_file(metrics_path, bundle.iteration);

  TrainResult result;
  result.total_iterations = tc.iterations;
  result.best_val_ami = bundle.best_val_ami;
  result.final_checkpoint = (ckpt_dir / checkpoint_name(tc.iterations)).string();
  if (bundle.iteration == tc.iterations) return result;

  // Expert pool for the critic: every burn-in pair of every training demo.
  std::vector<ObsActPair> expert_pool;
  for (const Demonstration& d : train_demos)
    for (const BurnInPair& p : d.burn_in)
      expert_pool.push_back(ObsActPair{obs_vector(p.obs), action_vector(p.action)});
  if (expert_pool.empty())
    throw ConfigError("training: demonstrations carry no burn-in pairs");

  std::ofstream metrics(metrics_path, std::ios::app);
  if (!metrics) throw RuntimeFault("training: cannot write " + metrics_path.string());

  for (int64_t iter = bundle.iteration; iter < tc.iterations; ++iter) {
    try {
      const uint64_t iter_u = static_cast<uint64_t>(iter);

      RolloutBatch batch = collect_rollouts(cfg, track, sim, obsstd, gains, bundle,
                                            train_demos, is_gail, iter);

      // Critic updates on fresh minibatches, drawn with replacement.
      double wasserstein = 0.0;
      for (int u = 0; u < tc.critic_updates; ++u) {
        Rng rng(derive_seed(cfg.seed, "critic_minibatch", iter_u, static_cast<uint64_t>(u)));
        std::vector<ObsActPair> expert_mb(tc.critic_minibatch), policy_mb(tc.critic_minibatch);
        for (int i = 0; i < tc.critic_minibatch; ++i)
          expert_mb[i] = expert_pool[rng.uniform_int(static_cast<int>(expert_pool.size()))];
        for (int i = 0; i < tc.critic_minibatch; ++i)
          policy_mb[i] = batch.pairs[rng.uniform_int(static_cast<int>(batch.pairs.size()))];
        wasserstein += critic_update(bundle.critic, expert_mb, policy_mb, bundle.critic_opt,
                                     tc.clip_c);
      }
      if (tc.critic_updates > 0) wasserstein /= tc.critic_updates;

      // Style-reader update and its training-quality readout. gail has no
      // style reader in play; its columns stay zero.
      InferenceUpdateResult inf_res;
      double train_ami = 0.0;
      if (!is_gail) {
        Rng rng(derive_seed(cfg.seed, "inference_minibatch", iter_u));
        const int n_pairs = static_cast<int>(batch.pairs.size());
        std::vector<ObsActPair> mb(tc.inference_minibatch);
        std::vector<int> mb_codes(tc.inference_minibatch);
        for (int i = 0; i < tc.inference_minibatch; ++i) {
          const int pick = rng.uniform_int(n_pairs);
          mb[i] = batch.pairs[pick];
          mb_codes[i] = batch.step_codes[pick];
        }
        std::vector<const Demonstration*> entropy_demos(tc.entropy_minibatch);
        for (int i = 0; i < tc.entropy_minibatch; ++i)
          entropy_demos[i] = &train_demos[rng.uniform_int(static_cast<int>(train_demos.size()))];
        inf_res = inference_update(bundle.inference, mb, mb_codes, entropy_demos, tc.lambda,
                                   bundle.inference_opt);

        // AMI of the updated reader's votes against the hidden styles, on the
        // same minibatch of demos.
        std::vector<int> votes(entropy_demos.size()), truth(entropy_demos.size());
        std::vector<Eigen::VectorXd> obs, actions;
        for (size_t i = 0; i < entropy_demos.size(); ++i) {
          demo_burn_in_vectors(*entropy_demos[i], obs, actions);
          votes[i] = infer_trajectory(bundle.inference, obs, actions).vote_label;
          truth[i] = entropy_demos[i]->style_class;
        }
        train_ami = adjusted_mutual_information(votes, truth).score;
      }

      // Rewards against the post-update critic and reader, then the policy step.
      double return_sum = 0.0;
      for (size_t i = 0; i < batch.steps.size(); ++i) {
        const ObsActPair& pair = batch.pairs[i];
        const double score = bundle.critic.score(pair.obs, pair.action);
        double reward;
        if (is_gail) {
          reward = composite_reward(score, 1.0, 0.0);
        } else {
          const Eigen::VectorXd q = bundle.inference.posterior(pair.obs, pair.action);
          reward = composite_reward(score, q[batch.step_codes[i]], tc.eta);
        }
        batch.steps[i].reward = reward;
        return_sum += reward;
      }
      const double mean_return = return_sum / static_cast<double>(batch.traj_start.size());

      AdvantageBatch adv = compute_advantages(batch.steps, tc.gamma, cfg.trpo.baseline);
      TrpoDiagnostics diag = trpo_step(bundle.policy, batch.steps, adv.advantages, cfg.trpo);

      std::array<double, kCodeDim> freq{};
      if (!is_gail) {
        for (const LatentCode& c : batch.traj_code)
          if (c.cls >= 0) freq[static_cast<size_t>(c.cls)] += 1.0;
        for (double& f : freq) f /= static_cast<double>(batch.traj_code.size());
      }

      const int64_t completed = iter + 1;
      metrics << completed << ',' << csv_double(wasserstein) << ',' << csv_double(inf_res.ce)
              << ',' << csv_double(inf_res.entropy) << ',' << csv_double(mean_return) << ','
              << csv_double(freq[0]) << ',' << csv_double(freq[1]) << ','
              << csv_double(freq[2]) << ',' << csv_double(freq[3]) << ','
              << csv_double(train_ami) << ',' << csv_double(diag.kl) << ','
              << csv_double(diag.surrogate_before) << ',' << csv_double(diag.surrogate_after)
              << ',' << csv_double(diag.cg_residual) << ',' << diag.backtrack_steps << '\n'
              << std::flush;
      if (!metrics) throw RuntimeFault("training: cannot write " + metrics_path.string());

      bundle.iteration = completed;
      result.iterations_run += 1;

      if (completed % tc.checkpoint_every == 0 || completed == tc.iterations) {
        // Validation first, so the numbered checkpoint carries the updated
        // best mark and a resumed run repeats the exact same decisions.
        if (!is_gail && !val_demos.empty()) {
          const double val = validation_ami(bundle.inference, val_demos).score;
          if (val > bundle.best_val_ami) {
            bundle.best_val_ami = val;
            result.best_val_ami = val;
            save_bundle((ckpt_dir / "best.bgc").string(), bundle, cfg);
          }
        }
        save_bundle((ckpt_dir / checkpoint_name(completed)).string(), bundle, cfg);
      }
    } catch (...) {
      try {
        save_bundle((ckpt_dir / "halt.bgc").string(), bundle, cfg);
      } catch (...) {
        // The original fault is the one worth reporting.
      }
      throw;
    }
  }

  result.best_val_ami = bundle.best_val_ami;
  return result;
}

}  // namespace burngail
