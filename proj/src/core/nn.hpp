#pragma once

#include <Eigen/Dense>
#include <vector>

#include "core/rng.hpp"

namespace burngail {

enum class Activation { Tanh, Identity };

struct LayerSpec {
  int in = 0;
  int out = 0;
  Activation act = Activation::Tanh;
  bool bias = true;
};

// Location of one layer's blocks inside the flat parameter vector. Weights
// are stored column-major (out × in), followed by the bias when present.
struct LayerLayout {
  int w_offset = 0;
  int b_offset = -1;  // -1 when the layer has no bias
  int in = 0;
  int out = 0;
};

// Multilayer perceptron over a caller-owned flat parameter vector. The class
// holds only the architecture; parameters live in one contiguous array so
// optimizers, trust-region steps, and checkpoints all see a single vector.
class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(std::vector<LayerSpec> layers);

  int param_count() const { return count_; }
  int input_dim() const { return layers_.empty() ? 0 : layers_.front().in; }
  int output_dim() const { return layers_.empty() ? 0 : layers_.back().out; }
  const std::vector<LayerSpec>& layers() const { return layers_; }
  LayerLayout layout(int layer) const;

  // Glorot-uniform weights in ±sqrt(6/(fan_in+fan_out)), zero biases.
  void init_params(Eigen::Ref<Eigen::VectorXd> params, Rng& rng) const;

  // act[k] is the layer-k output after activation; act[0] is the input.
  struct Cache {
    std::vector<Eigen::VectorXd> act;
  };

  Eigen::VectorXd forward(Eigen::Ref<const Eigen::VectorXd> params,
                          Eigen::Ref<const Eigen::VectorXd> input,
                          Cache* cache = nullptr) const;

  // Reverse-mode: accumulates dL/dparams into param_grads (+=) and returns
  // dL/dinput, given dL/doutput and the forward cache.
  Eigen::VectorXd backward(Eigen::Ref<const Eigen::VectorXd> params, const Cache& cache,
                           Eigen::Ref<const Eigen::VectorXd> out_grad,
                           Eigen::Ref<Eigen::VectorXd> param_grads) const;

  // Forward-mode directional derivative of the output with respect to the
  // parameters along dparams, at the input recorded in the cache. When
  // dinput is given it carries an input tangent through as well (needed when
  // this net consumes the output of another parameterized net).
  Eigen::VectorXd jvp_params(Eigen::Ref<const Eigen::VectorXd> params, const Cache& cache,
                             Eigen::Ref<const Eigen::VectorXd> dparams,
                             const Eigen::VectorXd* dinput = nullptr) const;

 private:
  std::vector<LayerSpec> layers_;
  std::vector<LayerLayout> layouts_;
  int count_ = 0;
};

// ---------------------------------------------------------------------------
// Optimizers. Both minimize: params move against the gradient. A non-finite
// gradient raises RuntimeFault as a training-divergence signal.

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamConfig cfg;
  Eigen::VectorXd m;  // first-moment accumulator
  Eigen::VectorXd v;  // second-moment accumulator
  long step = 0;
  AdamState() = default;
  explicit AdamState(int n, AdamConfig c = {})
      : cfg(c), m(Eigen::VectorXd::Zero(n)), v(Eigen::VectorXd::Zero(n)) {}
};

void adam_step(AdamState& state, Eigen::Ref<Eigen::VectorXd> params,
               Eigen::Ref<const Eigen::VectorXd> grad);

struct RmsPropConfig {
  double lr = 5e-5;
  double rho = 0.9;
  double eps = 1e-8;
};

// Momentum-free by construction: only a squared-gradient accumulator.
struct RmsPropState {
  RmsPropConfig cfg;
  Eigen::VectorXd sq;
  RmsPropState() = default;
  explicit RmsPropState(int n, RmsPropConfig c = {})
      : cfg(c), sq(Eigen::VectorXd::Zero(n)) {}
};

void rmsprop_step(RmsPropState& state, Eigen::Ref<Eigen::VectorXd> params,
                  Eigen::Ref<const Eigen::VectorXd> grad);

// Clamps every entry to [-c, c] in place (Lipschitz constraint). c must be > 0.
void clip_weights(Eigen::Ref<Eigen::VectorXd> params, double c);

// ---------------------------------------------------------------------------
// Probability utilities.

// Numerically stable log(1 + e^x).
double stable_softplus(double x);

Eigen::VectorXd softmax(Eigen::Ref<const Eigen::VectorXd> logits);

// -log probs[label]; probability below eps=1e-8 is clamped and flagged via
// *clamped so callers can surface degenerate posteriors.
double cross_entropy(Eigen::Ref<const Eigen::VectorXd> probs, int label,
                     bool* clamped = nullptr);

// Shannon entropy with 0·log 0 = 0.
double entropy(Eigen::Ref<const Eigen::VectorXd> probs);

// KL(N(mean0, diag sigma0²) || N(mean1, diag sigma1²)), summed over dims.
double diag_gauss_kl(Eigen::Ref<const Eigen::VectorXd> mean0,
                     Eigen::Ref<const Eigen::VectorXd> sigma0,
                     Eigen::Ref<const Eigen::VectorXd> mean1,
                     Eigen::Ref<const Eigen::VectorXd> sigma1);

struct GaussianLogProb {
  double value = 0.0;
  Eigen::VectorXd d_action;
  Eigen::VectorXd d_mean;
  Eigen::VectorXd d_log_sigma;
};

// Diagonal-Gaussian log density with analytic gradients. sigma must be
// positive elementwise (RuntimeFault otherwise).
GaussianLogProb gaussian_logprob(Eigen::Ref<const Eigen::VectorXd> action,
                                 Eigen::Ref<const Eigen::VectorXd> mean,
                                 Eigen::Ref<const Eigen::VectorXd> sigma);

}  // namespace burngail
