#include "core/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <thread>

#include <nlohmann/json.hpp>

#include "core/errors.hpp"
#include "core/rng.hpp"

namespace burngail {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Labels remapped to dense 0..k-1 (sorted by original value, so the mapping
// is deterministic for any input alphabet).
std::vector<int> densify(const std::vector<int>& labels, int* k_out) {
  std::vector<int> uniq(labels);
  std::sort(uniq.begin(), uniq.end());
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
  std::vector<int> out(labels.size());
  for (size_t i = 0; i < labels.size(); ++i) {
    out[i] = static_cast<int>(std::lower_bound(uniq.begin(), uniq.end(), labels[i]) -
                              uniq.begin());
  }
  *k_out = static_cast<int>(uniq.size());
  return out;
}

void write_text_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeFault("cannot open for writing: " + path);
  out << body;
  if (!out) throw RuntimeFault("write failed: " + path);
}

}  // namespace

std::string csv_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void demo_burn_in_vectors(const Demonstration& demo, std::vector<Eigen::VectorXd>& obs,
                          std::vector<Eigen::VectorXd>& actions) {
  obs.clear();
  actions.clear();
  obs.reserve(demo.burn_in.size());
  actions.reserve(demo.burn_in.size());
  for (const BurnInPair& p : demo.burn_in) {
    obs.push_back(Eigen::Map<const Eigen::VectorXd>(p.obs.data(), p.obs.size()));
    Eigen::VectorXd a(2);
    a << p.action.accel, p.action.turn_rate;
    actions.push_back(std::move(a));
  }
}

AmiResult adjusted_mutual_information(const std::vector<int>& labels_a,
                                      const std::vector<int>& labels_b) {
  if (labels_a.size() != labels_b.size())
    throw RuntimeFault("adjusted_mutual_information: label lists differ in length");
  if (labels_a.empty()) throw RuntimeFault("adjusted_mutual_information: empty labelings");

  int ka = 0, kb = 0;
  const std::vector<int> da = densify(labels_a, &ka);
  const std::vector<int> db = densify(labels_b, &kb);
  const int n = static_cast<int>(labels_a.size());

  Eigen::MatrixXi table = Eigen::MatrixXi::Zero(ka, kb);
  for (int i = 0; i < n; ++i) table(da[i], db[i]) += 1;
  std::vector<int> row(ka, 0), col(kb, 0);
  for (int i = 0; i < ka; ++i)
    for (int j = 0; j < kb; ++j) {
      row[i] += table(i, j);
      col[j] += table(i, j);
    }

  const double dn = static_cast<double>(n);
  double mi = 0.0;
  for (int i = 0; i < ka; ++i)
    for (int j = 0; j < kb; ++j) {
      const int nij = table(i, j);
      if (nij == 0) continue;
      mi += (nij / dn) * std::log(dn * nij / (static_cast<double>(row[i]) * col[j]));
    }
  double h_a = 0.0, h_b = 0.0;
  for (int i = 0; i < ka; ++i) h_a -= (row[i] / dn) * std::log(row[i] / dn);
  for (int j = 0; j < kb; ++j) h_b -= (col[j] / dn) * std::log(col[j] / dn);

  // Exact E[MI] under the fixed-marginal permutation model: for each cell,
  // sum the hypergeometric probabilities of every feasible count. All
  // combinatorics go through a log-factorial table.
  std::vector<double> lf(n + 1);
  for (int i = 0; i <= n; ++i) lf[i] = std::lgamma(i + 1.0);
  double emi = 0.0;
  for (int i = 0; i < ka; ++i) {
    for (int j = 0; j < kb; ++j) {
      const int ai = row[i], bj = col[j];
      const int lo = std::max(1, ai + bj - n);
      const int hi = std::min(ai, bj);
      for (int nij = lo; nij <= hi; ++nij) {
        const double logw = lf[ai] + lf[bj] + lf[n - ai] + lf[n - bj] - lf[n] - lf[nij] -
                            lf[ai - nij] - lf[bj - nij] - lf[n - ai - bj + nij];
        emi += (nij / dn) * std::log(dn * nij / (static_cast<double>(ai) * bj)) *
               std::exp(logw);
      }
    }
  }

  const double denom = std::max(h_a, h_b) - emi;
  if (std::abs(denom) < 1e-12) return {0.0, true};
  const double score = (mi - emi) / denom;
  return {std::min(score, 1.0), false};
}

KmeansResult kmeans_cluster(const Eigen::MatrixXd& points, int k, uint64_t seed,
                            int restarts, int max_iters) {
  const int n = static_cast<int>(points.rows());
  const int d = static_cast<int>(points.cols());
  if (n < 1) throw ConfigError("kmeans: no points");
  if (k < 1) throw ConfigError("kmeans: k must be positive");
  if (k > n) throw ConfigError("kmeans: k exceeds the number of points");
  if (restarts < 1) throw ConfigError("kmeans: restarts must be positive");

  KmeansResult best;
  best.wcss = kInf;
  for (int r = 0; r < restarts; ++r) {
    Rng rng(derive_seed(seed, "kmeans_restart", static_cast<uint64_t>(r)));

    // Distance-weighted seeding: each next center drawn proportionally to
    // the squared distance from the centers chosen so far.
    Eigen::MatrixXd cent(k, d);
    cent.row(0) = points.row(rng.uniform_int(n));
    std::vector<double> d2(n, kInf);
    for (int c = 1; c < k; ++c) {
      double total = 0.0;
      for (int i = 0; i < n; ++i) {
        d2[i] = std::min(d2[i], (points.row(i) - cent.row(c - 1)).squaredNorm());
        total += d2[i];
      }
      const int pick = total > 0.0 ? rng.categorical(d2) : rng.uniform_int(n);
      cent.row(c) = points.row(pick);
    }

    std::vector<int> labels(n, -1);
    std::vector<int> counts(k, 0);
    std::vector<double> dist_own(n, 0.0);
    for (int iter = 0; iter < max_iters; ++iter) {
      bool changed = false;
      std::fill(counts.begin(), counts.end(), 0);
      for (int i = 0; i < n; ++i) {
        int arg = 0;
        double bestd = kInf;
        for (int c = 0; c < k; ++c) {
          const double dd = (points.row(i) - cent.row(c)).squaredNorm();
          if (dd < bestd) {
            bestd = dd;
            arg = c;
          }
        }
        if (labels[i] != arg) {
          labels[i] = arg;
          changed = true;
        }
        dist_own[i] = bestd;
        counts[arg] += 1;
      }
      for (int c = 0; c < k; ++c) {
        if (counts[c] > 0) continue;
        // Reseed an empty cluster to the worst-served point.
        int far = 0;
        for (int i = 0; i < n; ++i)
          if (dist_own[i] > dist_own[far]) far = i;
        cent.row(c) = points.row(far);
        counts[labels[far]] -= 1;
        labels[far] = c;
        counts[c] = 1;
        dist_own[far] = 0.0;
        changed = true;
      }
      if (!changed) break;
      Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, d);
      for (int i = 0; i < n; ++i) sums.row(labels[i]) += points.row(i);
      for (int c = 0; c < k; ++c)
        if (counts[c] > 0) cent.row(c) = sums.row(c) / counts[c];
    }

    double wcss = 0.0;
    for (int i = 0; i < n; ++i) wcss += (points.row(i) - cent.row(labels[i])).squaredNorm();
    if (wcss < best.wcss) {
      best.labels = labels;
      best.centroids = cent;
      best.wcss = wcss;
    }
  }
  return best;
}

namespace {

int majority_label(const std::vector<int>& labels, int k) {
  std::vector<int> votes(k, 0);
  for (int l : labels) votes[l] += 1;
  int arg = 0;
  for (int c = 1; c < k; ++c)
    if (votes[c] > votes[arg]) arg = c;
  return arg;
}

}  // namespace

std::vector<int> kmeans_demo_labels(const std::vector<Demonstration>& demos, int k,
                                    uint64_t seed, int restarts) {
  if (demos.empty()) throw RuntimeFault("kmeans_demo_labels: no demonstrations");
  int rows = 0;
  for (const Demonstration& d : demos) rows += static_cast<int>(d.burn_in.size());
  if (rows == 0) throw RuntimeFault("kmeans_demo_labels: demonstrations have no burn-in pairs");
  const int obs_dim = static_cast<int>(demos[0].burn_in.at(0).obs.size());
  const int dim = obs_dim + 2;

  Eigen::MatrixXd pts(rows, dim);
  int r = 0;
  for (const Demonstration& d : demos) {
    for (const BurnInPair& p : d.burn_in) {
      if (static_cast<int>(p.obs.size()) != obs_dim)
        throw RuntimeFault("kmeans_demo_labels: inconsistent observation size");
      for (int c = 0; c < obs_dim; ++c) pts(r, c) = p.obs[c];
      pts(r, obs_dim) = p.action.accel;
      pts(r, obs_dim + 1) = p.action.turn_rate;
      ++r;
    }
  }
  for (int c = 0; c < dim; ++c) {
    const double mean = pts.col(c).mean();
    const double std_dev = std::sqrt((pts.col(c).array() - mean).square().mean());
    pts.col(c).array() -= mean;
    if (std_dev > 1e-12) pts.col(c) /= std_dev;
  }

  const KmeansResult km = kmeans_cluster(pts, k, seed, restarts);
  std::vector<int> out(demos.size());
  int at = 0;
  for (size_t i = 0; i < demos.size(); ++i) {
    const int cnt = static_cast<int>(demos[i].burn_in.size());
    std::vector<int> mine(km.labels.begin() + at, km.labels.begin() + at + cnt);
    out[i] = majority_label(mine, k);
    at += cnt;
  }
  return out;
}

std::vector<int> inference_demo_labels(const InferenceNet& net,
                                       const std::vector<Demonstration>& demos) {
  std::vector<int> out(demos.size());
  std::vector<Eigen::VectorXd> obs, actions;
  for (size_t i = 0; i < demos.size(); ++i) {
    demo_burn_in_vectors(demos[i], obs, actions);
    out[i] = infer_trajectory(net, obs, actions).vote_label;
  }
  return out;
}

std::vector<int> true_demo_labels(const std::vector<Demonstration>& demos) {
  std::vector<int> out(demos.size());
  for (size_t i = 0; i < demos.size(); ++i) out[i] = demos[i].style_class;
  return out;
}

AmiResult validation_ami(const InferenceNet& net, const std::vector<Demonstration>& demos) {
  return adjusted_mutual_information(inference_demo_labels(net, demos),
                                     true_demo_labels(demos));
}

CodeMode code_mode_for(const std::string& algorithm) {
  if (algorithm == "burn_infogail") return CodeMode::BurnInference;
  if (algorithm == "infogail") return CodeMode::Uniform;
  if (algorithm == "gail") return CodeMode::None;
  throw ConfigError("unknown algorithm \"" + algorithm +
                    "\" (expected gail, infogail, or burn_infogail)");
}

namespace {

struct EvalPlan {
  std::vector<int> picks;
  bool resampled = false;
};

EvalPlan plan_eval(int dataset_size, int n_rollouts, uint64_t seed, const char* label) {
  if (dataset_size < 1) throw RuntimeFault("evaluation: empty demonstration set");
  if (n_rollouts < 1) throw ConfigError("evaluation: n_rollouts must be positive");
  EvalPlan plan;
  Rng rng(derive_seed(seed, label));
  if (n_rollouts <= dataset_size) {
    std::vector<int> perm = rng.permutation(dataset_size);
    plan.picks.assign(perm.begin(), perm.begin() + n_rollouts);
  } else {
    plan.resampled = true;
    plan.picks.resize(n_rollouts);
    for (int i = 0; i < n_rollouts; ++i) plan.picks[i] = rng.uniform_int(dataset_size);
  }
  return plan;
}

LatentCode eval_code(CodeMode mode, const InferenceNet* inference, const Demonstration& demo,
                     uint64_t seed, int rollout_idx) {
  switch (mode) {
    case CodeMode::None:
      return LatentCode::sentinel();
    case CodeMode::Uniform: {
      Rng rng(derive_seed(seed, "eval_code", static_cast<uint64_t>(rollout_idx)));
      return LatentCode::of(rng.uniform_int(kCodeDim));
    }
    case CodeMode::BurnInference: {
      if (!inference)
        throw RuntimeFault("evaluation: burn-in code mode needs the inference network");
      std::vector<Eigen::VectorXd> obs, actions;
      demo_burn_in_vectors(demo, obs, actions);
      return LatentCode::of(infer_trajectory(*inference, obs, actions).vote_label);
    }
  }
  throw RuntimeFault("evaluation: unknown code mode");
}

// Runs the planned eval rollouts (deterministic actions, no early stop),
// strided across `workers` threads; `consume(i, result)` writes only to
// rollout i's slot, so results are identical for any worker count.
template <typename Fn>
void run_eval_rollouts(const TrackGeometry& track, const SimParams& sim,
                       const ObsStandardization& obsstd, const SteerGains& gains,
                       const Policy* policy, const InferenceNet* inference,
                       const std::vector<Demonstration>& demos, const EvalPlan& plan,
                       int horizon, CodeMode mode, uint64_t seed, int workers, Fn consume) {
  if (horizon < 1) throw ConfigError("evaluation: horizon must be positive");
  const int n = static_cast<int>(plan.picks.size());
  workers = std::max(1, std::min(workers, n));
  auto work = [&](int w) {
    for (int i = w; i < n; i += workers) {
      const Demonstration& demo = demos[plan.picks[i]];
      RolloutSpec spec;
      spec.horizon = horizon;
      spec.train_mode = false;
      spec.stochastic = false;
      spec.code = policy ? eval_code(mode, inference, demo, seed, i) : LatentCode::sentinel();
      consume(i, run_rollout(track, sim, obsstd, gains, demo, policy, spec, nullptr));
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
}

}  // namespace

RmseCurves rmse_eval(const TrackGeometry& track, const SimParams& sim,
                     const ObsStandardization& obsstd, const SteerGains& gains,
                     const Policy* policy, const InferenceNet* inference,
                     const std::vector<Demonstration>& demos, int n_rollouts, int horizon,
                     CodeMode mode, uint64_t seed, int workers) {
  const EvalPlan plan = plan_eval(static_cast<int>(demos.size()), n_rollouts, seed, "eval_pick");
  for (int p : plan.picks) {
    if (static_cast<int>(demos[p].expert_continuation.size()) < horizon)
      throw RuntimeFault("demonstration " + std::to_string(demos[p].id) +
                         ": expert continuation shorter than evaluation horizon");
  }

  const int n = static_cast<int>(plan.picks.size());
  std::vector<std::vector<double>> sq_speed(n), sq_pos(n);
  run_eval_rollouts(track, sim, obsstd, gains, policy, inference, demos, plan, horizon, mode,
                    seed, workers, [&](int i, const RolloutResult& res) {
                      const Demonstration& demo = demos[plan.picks[i]];
                      sq_speed[i].resize(horizon);
                      sq_pos[i].resize(horizon);
                      for (int t = 0; t < horizon; ++t) {
                        const ContinuationPoint& e = demo.expert_continuation[t];
                        const ContinuationPoint& g = res.ego_trace[t];
                        sq_speed[i][t] = (g.v - e.v) * (g.v - e.v);
                        sq_pos[i][t] = (g.x - e.x) * (g.x - e.x) + (g.y - e.y) * (g.y - e.y);
                      }
                    });

  RmseCurves out;
  out.n_rollouts = n;
  out.resampled = plan.resampled;
  out.speed.assign(horizon + 1, 0.0);
  out.pos.assign(horizon + 1, 0.0);
  for (int t = 0; t < horizon; ++t) {
    double acc_v = 0.0, acc_p = 0.0;
    for (int i = 0; i < n; ++i) {  // fixed reduction order
      acc_v += sq_speed[i][t];
      acc_p += sq_pos[i][t];
    }
    out.speed[t + 1] = std::sqrt(acc_v / n);
    out.pos[t + 1] = std::sqrt(acc_p / n);
  }
  return out;
}

EventFractions event_frequencies(const TrackGeometry& track, const SimParams& sim,
                                 const ObsStandardization& obsstd, const SteerGains& gains,
                                 const Policy* policy, const InferenceNet* inference,
                                 const std::vector<Demonstration>& demos, int n_rollouts,
                                 int horizon, CodeMode mode, uint64_t seed, int workers) {
  const EvalPlan plan =
      plan_eval(static_cast<int>(demos.size()), n_rollouts, seed, "eval_events_pick");
  const int n = static_cast<int>(plan.picks.size());
  std::vector<std::array<int64_t, 3>> counts(n, {0, 0, 0});
  run_eval_rollouts(track, sim, obsstd, gains, policy, inference, demos, plan, horizon, mode,
                    seed, workers, [&](int i, const RolloutResult& res) {
                      for (const RolloutStep& s : res.steps) {
                        counts[i][0] += s.events.offroad ? 1 : 0;
                        counts[i][1] += s.events.collision ? 1 : 0;
                        counts[i][2] += s.events.reversal ? 1 : 0;
                      }
                    });
  int64_t off = 0, col = 0, rev = 0;
  for (int i = 0; i < n; ++i) {
    off += counts[i][0];
    col += counts[i][1];
    rev += counts[i][2];
  }
  const double total = static_cast<double>(n) * horizon;
  return {off / total, col / total, rev / total};
}

void write_rmse_csv(const std::string& path, const RmseCurves& curves) {
  std::string body = "t,rmse_speed,rmse_pos\n";
  for (size_t t = 0; t < curves.speed.size(); ++t) {
    body += std::to_string(t) + "," + csv_double(curves.speed[t]) + "," +
            csv_double(curves.pos[t]) + "\n";
  }
  write_text_file(path, body);
}

void write_events_csv(const std::string& path, const EventFractions& events) {
  std::string body = "offroad,collision,reversal\n";
  body += csv_double(events.offroad) + "," + csv_double(events.collision) + "," +
          csv_double(events.reversal) + "\n";
  write_text_file(path, body);
}

void write_ami_csv(const std::string& path, const std::vector<AmiRow>& rows) {
  std::string body = "method,split,ami\n";
  for (const AmiRow& r : rows)
    body += r.method + "," + r.split + "," + csv_double(r.ami) + "\n";
  write_text_file(path, body);
}

void write_embedding_csv(const std::string& path, const Policy& policy) {
  std::string body;
  for (int c = 0; c < kCodeDim; ++c) {
    const Eigen::VectorXd e = policy.embedding(c);
    for (int i = 0; i < e.size(); ++i) {
      if (i) body += ",";
      body += csv_double(e[i]);
    }
    body += "\n";
  }
  write_text_file(path, body);
}

void write_trajectories_jsonl(const std::string& path, const TrackGeometry& track,
                              const SimParams& sim, const ObsStandardization& obsstd,
                              const SteerGains& gains, const Policy& policy,
                              const std::vector<Demonstration>& demos, int trials_per_code,
                              int horizon, uint64_t seed) {
  const EvalPlan plan = plan_eval(static_cast<int>(demos.size()), trials_per_code, seed,
                                  "export_pick");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeFault("cannot open for writing: " + path);
  for (int code = 0; code < kCodeDim; ++code) {
    for (int trial = 0; trial < trials_per_code; ++trial) {
      const Demonstration& demo = demos[plan.picks[trial]];
      RolloutSpec spec;
      spec.horizon = horizon;
      spec.train_mode = false;
      spec.stochastic = false;
      spec.code = LatentCode::of(code);
      const RolloutResult res =
          run_rollout(track, sim, obsstd, gains, demo, &policy, spec, nullptr);

      const VehicleState& ego = demo.handoff_scene.vehicles[demo.handoff_scene.ego_index];
      const GlobalPose start = vehicle_global_pose(track, ego);
      nlohmann::ordered_json row;
      row["trial"] = trial;
      row["code"] = code;
      row["step"] = 0;
      row["x"] = start.x;
      row["y"] = start.y;
      row["v"] = ego.speed;
      out << row.dump() << '\n';
      for (size_t t = 0; t < res.ego_trace.size(); ++t) {
        row["step"] = static_cast<int>(t) + 1;
        row["x"] = res.ego_trace[t].x;
        row["y"] = res.ego_trace[t].y;
        row["v"] = res.ego_trace[t].v;
        out << row.dump() << '\n';
      }
    }
  }
  if (!out) throw RuntimeFault("write failed: " + path);
}

}  // namespace burngail
