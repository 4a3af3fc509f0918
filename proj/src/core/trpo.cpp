#include "core/trpo.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "core/errors.hpp"
#include "core/nn.hpp"

namespace burngail {
namespace {

// [start, end) spans of the trajectories in a batch, split on done flags; a
// trailing unfinished trajectory forms its own span.
std::vector<std::pair<int, int>> split_trajectories(const std::vector<PolicyStep>& steps) {
  std::vector<std::pair<int, int>> spans;
  int start = 0;
  const int n = static_cast<int>(steps.size());
  for (int i = 0; i < n; ++i) {
    if (steps[i].done) {
      spans.emplace_back(start, i + 1);
      start = i + 1;
    }
  }
  if (start < n) spans.emplace_back(start, n);
  return spans;
}

}  // namespace

AdvantageBatch compute_advantages(const std::vector<PolicyStep>& steps, double gamma,
                                  const std::string& baseline) {
  if (steps.empty()) throw RuntimeFault("compute_advantages: empty batch");
  if (!(gamma >= 0.0 && gamma <= 1.0))
    throw ConfigError("trainer.gamma must lie in [0, 1], got " + std::to_string(gamma));
  if (baseline != "linear" && baseline != "none")
    throw ConfigError("trpo.baseline must be \"linear\" or \"none\", got \"" + baseline + "\"");

  const int n = static_cast<int>(steps.size());
  AdvantageBatch out;
  out.returns.resize(n);
  out.advantages.resize(n);

  const auto spans = split_trajectories(steps);
  for (const auto& [b, e] : spans) {
    double g = 0.0;
    for (int i = e - 1; i >= b; --i) {
      g = steps[i].reward + gamma * g;
      out.returns[i] = g;
    }
  }

  if (baseline == "linear") {
    const int d = static_cast<int>(steps[0].obs.size());
    const int fdim = 2 * d + 4;
    Eigen::MatrixXd feats(n, fdim);
    Eigen::VectorXd y(n);
    for (const auto& [b, e] : spans) {
      for (int i = b; i < e; ++i) {
        const Eigen::VectorXd& obs = steps[i].obs;
        if (obs.size() != d)
          throw RuntimeFault("compute_advantages: inconsistent observation size in batch");
        const double t = static_cast<double>(i - b) / 100.0;
        feats.row(i).segment(0, d) = obs;
        feats.row(i).segment(d, d) = obs.array().square();
        feats(i, 2 * d) = t;
        feats(i, 2 * d + 1) = t * t;
        feats(i, 2 * d + 2) = t * t * t;
        feats(i, 2 * d + 3) = 1.0;
        y(i) = out.returns[i];
      }
    }
    Eigen::MatrixXd gram = feats.transpose() * feats;
    gram.diagonal().array() += 1e-8;
    const Eigen::VectorXd w = gram.ldlt().solve(feats.transpose() * y);
    const Eigen::VectorXd pred = feats * w;
    for (int i = 0; i < n; ++i) out.advantages[i] = out.returns[i] - pred(i);
  } else {
    out.advantages = out.returns;
  }

  double mean = 0.0;
  for (double a : out.advantages) mean += a;
  mean /= n;
  double var = 0.0;
  for (double a : out.advantages) var += (a - mean) * (a - mean);
  const double stddev = std::sqrt(var / n);
  if (stddev > 1e-8) {
    for (double& a : out.advantages) a = (a - mean) / stddev;
  }
  for (double a : out.advantages) {
    if (!std::isfinite(a)) throw RuntimeFault("compute_advantages: non-finite advantage");
  }
  return out;
}

PolicyLinearization linearize_policy(const Policy& policy,
                                     const std::vector<PolicyStep>& steps) {
  PolicyLinearization lin;
  lin.caches.resize(steps.size());
  lin.mean.resize(steps.size());
  for (size_t i = 0; i < steps.size(); ++i) {
    lin.mean[i] = policy.mean(steps[i].obs, steps[i].code, &lin.caches[i]);
  }
  lin.sigma = policy.sigma();
  lin.log_sigma = policy.log_sigma();
  return lin;
}

Eigen::VectorXd fisher_vector_product(const Policy& policy,
                                      const PolicyLinearization& lin,
                                      const Eigen::VectorXd& v, double damping) {
  if (v.size() != policy.param_count())
    throw RuntimeFault("fisher_vector_product: direction size mismatch");
  if (lin.caches.empty()) throw RuntimeFault("fisher_vector_product: empty linearization");

  const int n = static_cast<int>(lin.caches.size());
  Eigen::VectorXd out = Eigen::VectorXd::Zero(v.size());
  const Eigen::VectorXd inv_var = lin.sigma.array().square().inverse().matrix();
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd jv = policy.mean_jvp(lin.caches[i], v);
    policy.accumulate_mean_grad(lin.caches[i], jv.cwiseProduct(inv_var), out);
  }
  out /= n;  // mean block only so far — the log σ block is still zero
  policy.accumulate_log_sigma_grad(2.0 * policy.log_sigma_of(v), out);
  out += damping * v;
  return out;
}

CgResult conjugate_gradient(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& apply_A,
    const Eigen::VectorXd& b, int iters, double tol) {
  if (iters <= 0) throw ConfigError("trpo.cg_iters must be positive");
  if (!b.allFinite()) throw RuntimeFault("conjugate_gradient: non-finite right-hand side");

  CgResult res;
  res.x = Eigen::VectorXd::Zero(b.size());
  Eigen::VectorXd r = b;
  Eigen::VectorXd p = b;
  double rs = r.squaredNorm();
  const double stop = tol * std::sqrt(rs);
  if (rs == 0.0) return res;

  for (int k = 0; k < iters; ++k) {
    const Eigen::VectorXd ap = apply_A(p);
    if (!ap.allFinite()) throw RuntimeFault("conjugate_gradient: non-finite operator output");
    const double p_ap = p.dot(ap);
    if (!(p_ap > 0.0))
      throw RuntimeFault("conjugate_gradient: operator not positive definite along search direction");
    const double alpha = rs / p_ap;
    res.x += alpha * p;
    r -= alpha * ap;
    res.iterations = k + 1;
    const double rs_new = r.squaredNorm();
    if (std::sqrt(rs_new) <= stop) {
      rs = rs_new;
      break;
    }
    p = r + (rs_new / rs) * p;
    rs = rs_new;
  }
  if (!res.x.allFinite()) throw RuntimeFault("conjugate_gradient: non-finite solution");
  res.residual = std::sqrt(rs);
  return res;
}

TrpoDiagnostics trpo_step(Policy& policy, const std::vector<PolicyStep>& steps,
                          const std::vector<double>& advantages,
                          const TrpoSettings& cfg) {
  if (steps.empty()) throw RuntimeFault("trpo_step: empty batch");
  if (advantages.size() != steps.size())
    throw RuntimeFault("trpo_step: advantage count does not match batch size");

  const int n = static_cast<int>(steps.size());
  const PolicyLinearization lin = linearize_policy(policy, steps);

  // At the old parameters every ratio is 1, so the surrogate gradient is
  // mean(advantage · ∇ logp) and the surrogate itself is mean(advantage).
  std::vector<double> logp_old(n);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(policy.param_count());
  double adv_mean = 0.0;
  for (int i = 0; i < n; ++i) {
    const GaussianLogProb lp = gaussian_logprob(steps[i].action, lin.mean[i], lin.sigma);
    logp_old[i] = lp.value;
    policy.accumulate_mean_grad(lin.caches[i], advantages[i] * lp.d_mean, g);
    policy.accumulate_log_sigma_grad(advantages[i] * lp.d_log_sigma, g);
    adv_mean += advantages[i];
  }
  g /= n;
  adv_mean /= n;

  TrpoDiagnostics diag;
  diag.surrogate_before = adv_mean;
  diag.surrogate_after = adv_mean;

  if (!g.allFinite()) throw RuntimeFault("trpo_step: non-finite policy gradient");
  if (g.norm() < 1e-12) return diag;  // nothing to optimize; parameters unchanged

  const auto fvp = [&](const Eigen::VectorXd& v) {
    return fisher_vector_product(policy, lin, v, cfg.damping);
  };
  const CgResult cg = conjugate_gradient(fvp, g, cfg.cg_iters, cfg.cg_tol);
  diag.cg_residual = cg.residual;

  const double s_fs = cg.x.dot(fvp(cg.x));
  if (!(s_fs > 1e-16)) return diag;  // degenerate curvature; parameters unchanged
  const Eigen::VectorXd full_step = std::sqrt(2.0 * cfg.max_kl / s_fs) * cg.x;

  const Eigen::VectorXd theta_old = policy.params();
  for (int k = 0; k < cfg.backtrack_steps; ++k) {
    const double scale = std::pow(cfg.backtrack_ratio, k);
    policy.params() = theta_old + scale * full_step;

    const Eigen::VectorXd sigma_new = policy.sigma();
    double kl_sum = 0.0;
    double surr_sum = 0.0;
    for (int i = 0; i < n; ++i) {
      const Eigen::VectorXd mean_new =
          policy.mean(steps[i].obs, steps[i].code);
      kl_sum += diag_gauss_kl(lin.mean[i], lin.sigma, mean_new, sigma_new);
      const GaussianLogProb lp = gaussian_logprob(steps[i].action, mean_new, sigma_new);
      surr_sum += std::exp(lp.value - logp_old[i]) * advantages[i];
    }
    const double kl = kl_sum / n;
    const double surr = surr_sum / n;
    if (std::isfinite(kl) && std::isfinite(surr) && kl <= cfg.max_kl &&
        surr - diag.surrogate_before >= 0.0) {
      diag.kl = kl;
      diag.surrogate_after = surr;
      diag.backtrack_steps = k;
      diag.accepted = true;
      return diag;
    }
  }

  policy.params() = theta_old;  // line search exhausted: keep the old policy
  diag.backtrack_steps = cfg.backtrack_steps;
  return diag;
}

}  // namespace burngail
