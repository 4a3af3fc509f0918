#include "core/nn.hpp"

#include <cmath>

#include "core/errors.hpp"

namespace burngail {

namespace {

using ConstMat = Eigen::Map<const Eigen::MatrixXd>;
using ConstVec = Eigen::Map<const Eigen::VectorXd>;
using MutVec = Eigen::Map<Eigen::VectorXd>;

Eigen::VectorXd apply_activation(Activation act, const Eigen::VectorXd& z) {
  if (act == Activation::Tanh) return z.array().tanh();
  return z;
}

}  // namespace

Mlp::Mlp(std::vector<LayerSpec> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw ConfigError("Mlp: need at least one layer");
  for (size_t k = 0; k < layers_.size(); ++k) {
    const LayerSpec& l = layers_[k];
    if (l.in <= 0 || l.out <= 0) throw ConfigError("Mlp: layer dims must be positive");
    if (k > 0 && l.in != layers_[k - 1].out)
      throw ConfigError("Mlp: layer shapes do not chain");
    LayerLayout lay;
    lay.in = l.in;
    lay.out = l.out;
    lay.w_offset = count_;
    count_ += l.in * l.out;
    if (l.bias) {
      lay.b_offset = count_;
      count_ += l.out;
    }
    layouts_.push_back(lay);
  }
}

LayerLayout Mlp::layout(int layer) const { return layouts_.at(layer); }

void Mlp::init_params(Eigen::Ref<Eigen::VectorXd> params, Rng& rng) const {
  if (params.size() != count_) throw ConfigError("Mlp::init_params: size mismatch");
  for (size_t k = 0; k < layers_.size(); ++k) {
    const LayerLayout& lay = layouts_[k];
    double bound = std::sqrt(6.0 / (lay.in + lay.out));
    for (int i = 0; i < lay.in * lay.out; ++i)
      params[lay.w_offset + i] = rng.uniform(-bound, bound);
    if (lay.b_offset >= 0) params.segment(lay.b_offset, lay.out).setZero();
  }
}

Eigen::VectorXd Mlp::forward(Eigen::Ref<const Eigen::VectorXd> params,
                             Eigen::Ref<const Eigen::VectorXd> input,
                             Cache* cache) const {
  if (params.size() != count_) throw RuntimeFault("Mlp::forward: parameter size mismatch");
  if (input.size() != input_dim()) throw RuntimeFault("Mlp::forward: input size mismatch");
  if (cache) {
    cache->act.clear();
    cache->act.reserve(layers_.size() + 1);
    cache->act.push_back(input);
  }
  Eigen::VectorXd a = input;
  for (size_t k = 0; k < layers_.size(); ++k) {
    const LayerLayout& lay = layouts_[k];
    ConstMat W(params.data() + lay.w_offset, lay.out, lay.in);
    Eigen::VectorXd z = W * a;
    if (lay.b_offset >= 0) z += ConstVec(params.data() + lay.b_offset, lay.out);
    a = apply_activation(layers_[k].act, z);
    if (cache) cache->act.push_back(a);
  }
  return a;
}

Eigen::VectorXd Mlp::backward(Eigen::Ref<const Eigen::VectorXd> params, const Cache& cache,
                              Eigen::Ref<const Eigen::VectorXd> out_grad,
                              Eigen::Ref<Eigen::VectorXd> param_grads) const {
  if (cache.act.size() != layers_.size() + 1)
    throw RuntimeFault("Mlp::backward: cache does not match architecture");
  if (param_grads.size() != count_)
    throw RuntimeFault("Mlp::backward: gradient buffer size mismatch");
  Eigen::VectorXd g = out_grad;
  for (int k = static_cast<int>(layers_.size()) - 1; k >= 0; --k) {
    const LayerLayout& lay = layouts_[k];
    if (layers_[k].act == Activation::Tanh) {
      // tanh'(z) = 1 - tanh(z)^2, recovered from the stored post-activation.
      g.array() *= 1.0 - cache.act[k + 1].array().square();
    }
    ConstMat W(params.data() + lay.w_offset, lay.out, lay.in);
    MutVec wg(param_grads.data() + lay.w_offset, lay.in * lay.out);
    Eigen::Map<Eigen::MatrixXd>(wg.data(), lay.out, lay.in) += g * cache.act[k].transpose();
    if (lay.b_offset >= 0)
      MutVec(param_grads.data() + lay.b_offset, lay.out) += g;
    g = W.transpose() * g;
  }
  return g;
}

Eigen::VectorXd Mlp::jvp_params(Eigen::Ref<const Eigen::VectorXd> params, const Cache& cache,
                                Eigen::Ref<const Eigen::VectorXd> dparams,
                                const Eigen::VectorXd* dinput) const {
  if (cache.act.size() != layers_.size() + 1)
    throw RuntimeFault("Mlp::jvp_params: cache does not match architecture");
  if (dparams.size() != count_)
    throw RuntimeFault("Mlp::jvp_params: direction size mismatch");
  if (dinput && dinput->size() != input_dim())
    throw RuntimeFault("Mlp::jvp_params: input tangent size mismatch");
  Eigen::VectorXd v = dinput ? *dinput : Eigen::VectorXd::Zero(input_dim());
  for (size_t k = 0; k < layers_.size(); ++k) {
    const LayerLayout& lay = layouts_[k];
    ConstMat W(params.data() + lay.w_offset, lay.out, lay.in);
    ConstMat dW(dparams.data() + lay.w_offset, lay.out, lay.in);
    Eigen::VectorXd dz = W * v + dW * cache.act[k];
    if (lay.b_offset >= 0) dz += ConstVec(dparams.data() + lay.b_offset, lay.out);
    if (layers_[k].act == Activation::Tanh)
      dz.array() *= 1.0 - cache.act[k + 1].array().square();
    v = std::move(dz);
  }
  return v;
}

void adam_step(AdamState& state, Eigen::Ref<Eigen::VectorXd> params,
               Eigen::Ref<const Eigen::VectorXd> grad) {
  if (params.size() != state.m.size() || grad.size() != state.m.size())
    throw RuntimeFault("adam_step: shape mismatch");
  if (!grad.allFinite()) throw RuntimeFault("adam_step: non-finite gradient");
  state.step += 1;
  const AdamConfig& c = state.cfg;
  state.m = c.beta1 * state.m + (1.0 - c.beta1) * grad;
  state.v = c.beta2 * state.v.array() + (1.0 - c.beta2) * grad.array().square();
  double m_corr = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
  double v_corr = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
  params.array() -=
      c.lr * (state.m.array() / m_corr) / ((state.v.array() / v_corr).sqrt() + c.eps);
}

void rmsprop_step(RmsPropState& state, Eigen::Ref<Eigen::VectorXd> params,
                  Eigen::Ref<const Eigen::VectorXd> grad) {
  if (params.size() != state.sq.size() || grad.size() != state.sq.size())
    throw RuntimeFault("rmsprop_step: shape mismatch");
  if (!grad.allFinite()) throw RuntimeFault("rmsprop_step: non-finite gradient");
  const RmsPropConfig& c = state.cfg;
  state.sq = c.rho * state.sq.array() + (1.0 - c.rho) * grad.array().square();
  params.array() -= c.lr * grad.array() / (state.sq.array().sqrt() + c.eps);
}

void clip_weights(Eigen::Ref<Eigen::VectorXd> params, double c) {
  if (c <= 0.0) throw ConfigError("clip_weights: bound must be positive");
  params = params.cwiseMax(-c).cwiseMin(c);
}

double stable_softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

Eigen::VectorXd softmax(Eigen::Ref<const Eigen::VectorXd> logits) {
  if (logits.size() == 0) throw RuntimeFault("softmax: empty logits");
  Eigen::ArrayXd shifted = logits.array() - logits.maxCoeff();
  Eigen::ArrayXd e = shifted.exp();
  return e / e.sum();
}

double cross_entropy(Eigen::Ref<const Eigen::VectorXd> probs, int label, bool* clamped) {
  if (label < 0 || label >= probs.size()) throw RuntimeFault("cross_entropy: label out of range");
  constexpr double kEps = 1e-8;
  double p = probs[label];
  bool clip = p < kEps;
  if (clamped) *clamped = clip;
  return -std::log(clip ? kEps : p);
}

double entropy(Eigen::Ref<const Eigen::VectorXd> probs) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    double p = probs[i];
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

double diag_gauss_kl(Eigen::Ref<const Eigen::VectorXd> mean0,
                     Eigen::Ref<const Eigen::VectorXd> sigma0,
                     Eigen::Ref<const Eigen::VectorXd> mean1,
                     Eigen::Ref<const Eigen::VectorXd> sigma1) {
  if (mean0.size() != sigma0.size() || mean0.size() != mean1.size() ||
      mean0.size() != sigma1.size())
    throw RuntimeFault("diag_gauss_kl: shape mismatch");
  double kl = 0.0;
  for (Eigen::Index i = 0; i < mean0.size(); ++i) {
    if (sigma0[i] <= 0.0 || sigma1[i] <= 0.0)
      throw RuntimeFault("diag_gauss_kl: non-positive sigma");
    double r = sigma0[i] / sigma1[i];
    double d = (mean0[i] - mean1[i]) / sigma1[i];
    kl += -std::log(r) + 0.5 * (r * r + d * d - 1.0);
  }
  return kl;
}

GaussianLogProb gaussian_logprob(Eigen::Ref<const Eigen::VectorXd> action,
                                 Eigen::Ref<const Eigen::VectorXd> mean,
                                 Eigen::Ref<const Eigen::VectorXd> sigma) {
  if (action.size() != mean.size() || action.size() != sigma.size())
    throw RuntimeFault("gaussian_logprob: shape mismatch");
  constexpr double kLogTwoPi = 1.8378770664093453;
  GaussianLogProb out;
  out.d_action = Eigen::VectorXd(action.size());
  out.d_mean = Eigen::VectorXd(action.size());
  out.d_log_sigma = Eigen::VectorXd(action.size());
  for (Eigen::Index i = 0; i < action.size(); ++i) {
    if (sigma[i] <= 0.0) throw RuntimeFault("gaussian_logprob: non-positive sigma");
    double z = (action[i] - mean[i]) / sigma[i];
    out.value += -0.5 * z * z - std::log(sigma[i]) - 0.5 * kLogTwoPi;
    out.d_mean[i] = z / sigma[i];
    out.d_action[i] = -out.d_mean[i];
    out.d_log_sigma[i] = z * z - 1.0;
  }
  return out;
}

}  // namespace burngail
