#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "core/errors.hpp"
#include "core/nn.hpp"
#include "core/rng.hpp"

using namespace burngail;

namespace {

// Mixed absolute/relative gradient agreement: |a-b| <= tol * max(1, |a|+|b|).
void check_close_grad(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double tol) {
  REQUIRE(a.size() == b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    double scale = std::max(1.0, std::abs(a[i]) + std::abs(b[i]));
    INFO("coordinate ", i, ": ", a[i], " vs ", b[i]);
    CHECK(std::abs(a[i] - b[i]) <= tol * scale);
  }
}

// Scalar probe loss: fixed random functional of the network output.
double probe_loss(const Mlp& net, const Eigen::VectorXd& params,
                  const Eigen::VectorXd& input, const Eigen::VectorXd& w) {
  return w.dot(net.forward(params, input));
}

Mlp random_net(Rng& rng, int in_dim) {
  int n_layers = 1 + rng.uniform_int(3);
  std::vector<LayerSpec> spec;
  int in = in_dim;
  for (int k = 0; k < n_layers; ++k) {
    int out = 2 + rng.uniform_int(7);
    Activation act = (k + 1 == n_layers) ? Activation::Identity : Activation::Tanh;
    bool bias = rng.uniform() < 0.8;
    spec.push_back({in, out, act, bias});
    in = out;
  }
  return Mlp(std::move(spec));
}

}  // namespace

TEST_CASE("mlp rejects bad architectures") {
  CHECK_THROWS_AS(Mlp(std::vector<LayerSpec>{}), ConfigError);
  CHECK_THROWS_AS(Mlp({{4, 8}, {7, 2}}), ConfigError);  // shapes do not chain
  CHECK_THROWS_AS(Mlp({{0, 3}}), ConfigError);
}

TEST_CASE("zero weights pass bias through the activation") {
  Mlp net({{3, 2, Activation::Tanh, true}});
  Eigen::VectorXd params = Eigen::VectorXd::Zero(net.param_count());
  LayerLayout lay = net.layout(0);
  params[lay.b_offset] = 0.3;
  params[lay.b_offset + 1] = -1.1;
  Eigen::VectorXd out = net.forward(params, Eigen::VectorXd::Constant(3, 9.0));
  CHECK(out[0] == doctest::Approx(std::tanh(0.3)).epsilon(1e-12));
  CHECK(out[1] == doctest::Approx(std::tanh(-1.1)).epsilon(1e-12));
}

TEST_CASE("single linear layer backward is the transpose map") {
  Mlp net({{3, 2, Activation::Identity, false}});
  Rng rng(11);
  Eigen::VectorXd params(net.param_count());
  for (Eigen::Index i = 0; i < params.size(); ++i) params[i] = rng.normal();
  Eigen::VectorXd x(3);
  x << 0.5, -1.0, 2.0;
  Mlp::Cache cache;
  net.forward(params, x, &cache);
  Eigen::VectorXd g(2);
  g << 1.0, -2.0;
  Eigen::VectorXd pg = Eigen::VectorXd::Zero(net.param_count());
  Eigen::VectorXd in_grad = net.backward(params, cache, g, pg);
  Eigen::Map<const Eigen::MatrixXd> W(params.data(), 2, 3);
  Eigen::VectorXd expect = W.transpose() * g;
  check_close_grad(in_grad, expect, 1e-12);
  // Weight gradient is the outer product g xᵀ.
  Eigen::Map<const Eigen::MatrixXd> dW(pg.data(), 2, 3);
  CHECK(dW(0, 2) == doctest::Approx(1.0 * 2.0).epsilon(1e-12));
  CHECK(dW(1, 0) == doctest::Approx(-2.0 * 0.5).epsilon(1e-12));
}

TEST_CASE("observation-scale net gradients match central finite differences") {
  Mlp net({{51, 64, Activation::Tanh, true}, {64, 2, Activation::Identity, true}});
  Rng rng(7);
  Eigen::VectorXd params(net.param_count());
  net.init_params(params, rng);
  Eigen::VectorXd x(51), w(2);
  for (int i = 0; i < 51; ++i) x[i] = rng.normal();
  w << 0.7, -1.3;

  Mlp::Cache cache;
  net.forward(params, x, &cache);
  Eigen::VectorXd analytic = Eigen::VectorXd::Zero(net.param_count());
  Eigen::VectorXd in_grad = net.backward(params, cache, w, analytic);

  const double h = 1e-5;
  Eigen::VectorXd fd(net.param_count());
  Eigen::VectorXd p = params;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    double keep = p[i];
    p[i] = keep + h;
    double up = probe_loss(net, p, x, w);
    p[i] = keep - h;
    double dn = probe_loss(net, p, x, w);
    p[i] = keep;
    fd[i] = (up - dn) / (2.0 * h);
  }
  check_close_grad(analytic, fd, 1e-4);

  Eigen::VectorXd fd_in(x.size());
  Eigen::VectorXd xx = x;
  for (Eigen::Index i = 0; i < xx.size(); ++i) {
    double keep = xx[i];
    xx[i] = keep + h;
    double up = probe_loss(net, params, xx, w);
    xx[i] = keep - h;
    double dn = probe_loss(net, params, xx, w);
    xx[i] = keep;
    fd_in[i] = (up - dn) / (2.0 * h);
  }
  check_close_grad(in_grad, fd_in, 1e-4);
}

TEST_CASE("gradients agree with finite differences on 100 random nets") {
  const double h = 1e-5;
  for (int inst = 0; inst < 100; ++inst) {
    Rng rng(derive_seed(123, "fdcheck", inst));
    int in_dim = 2 + rng.uniform_int(6);
    Mlp net = random_net(rng, in_dim);
    Eigen::VectorXd params(net.param_count());
    net.init_params(params, rng);
    // Perturb biases too so tanh layers are not centered at zero.
    for (Eigen::Index i = 0; i < params.size(); ++i) params[i] += 0.1 * rng.normal();
    Eigen::VectorXd x(in_dim), w(net.output_dim());
    for (int i = 0; i < in_dim; ++i) x[i] = rng.normal();
    for (int i = 0; i < net.output_dim(); ++i) w[i] = rng.normal();

    Mlp::Cache cache;
    net.forward(params, x, &cache);
    Eigen::VectorXd analytic = Eigen::VectorXd::Zero(net.param_count());
    net.backward(params, cache, w, analytic);

    Eigen::VectorXd p = params;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      double keep = p[i];
      p[i] = keep + h;
      double up = probe_loss(net, p, x, w);
      p[i] = keep - h;
      double dn = probe_loss(net, p, x, w);
      p[i] = keep;
      double fd = (up - dn) / (2.0 * h);
      double scale = std::max(1.0, std::abs(analytic[i]) + std::abs(fd));
      INFO("instance ", inst, " coordinate ", i);
      CHECK(std::abs(analytic[i] - fd) <= 1e-4 * scale);
    }
  }
}

TEST_CASE("parameter jvp matches directional finite differences") {
  for (int inst = 0; inst < 50; ++inst) {
    Rng rng(derive_seed(321, "jvp", inst));
    int in_dim = 2 + rng.uniform_int(6);
    Mlp net = random_net(rng, in_dim);
    Eigen::VectorXd params(net.param_count());
    net.init_params(params, rng);
    Eigen::VectorXd x(in_dim), d(net.param_count());
    for (int i = 0; i < in_dim; ++i) x[i] = rng.normal();
    for (Eigen::Index i = 0; i < d.size(); ++i) d[i] = rng.normal();

    Mlp::Cache cache;
    net.forward(params, x, &cache);
    Eigen::VectorXd jvp = net.jvp_params(params, cache, d);

    const double h = 1e-6;
    Eigen::VectorXd up = net.forward(params + h * d, x);
    Eigen::VectorXd dn = net.forward(params - h * d, x);
    Eigen::VectorXd fd = (up - dn) / (2.0 * h);
    check_close_grad(jvp, fd, 1e-4);
  }
}

TEST_CASE("glorot init respects bounds and zeroes biases") {
  Mlp net({{51, 64, Activation::Tanh, true}, {64, 2, Activation::Identity, true}});
  Rng rng(5);
  Eigen::VectorXd params(net.param_count());
  net.init_params(params, rng);
  for (int k = 0; k < 2; ++k) {
    LayerLayout lay = net.layout(k);
    double bound = std::sqrt(6.0 / (lay.in + lay.out));
    for (int i = 0; i < lay.in * lay.out; ++i) {
      CHECK(std::abs(params[lay.w_offset + i]) <= bound);
    }
    CHECK(params.segment(lay.b_offset, lay.out).cwiseAbs().maxCoeff() == 0.0);
  }
  // Not degenerate: weights actually vary.
  CHECK(params.head(10).minCoeff() != params.head(10).maxCoeff());
}

TEST_CASE("adam first step moves each coordinate by about lr") {
  AdamState st(3);
  Eigen::VectorXd p = Eigen::VectorXd::Zero(3);
  Eigen::VectorXd g(3);
  g << 5.0, -0.01, 1e3;
  adam_step(st, p, g);
  // With zero moments, bias correction makes the first update lr·g/|g|.
  for (int i = 0; i < 3; ++i) {
    CHECK(std::abs(p[i]) == doctest::Approx(st.cfg.lr).epsilon(1e-6));
    CHECK(p[i] * g[i] < 0.0);  // descent direction
  }
}

TEST_CASE("zero gradient leaves parameters unchanged") {
  Eigen::VectorXd p0(4);
  p0 << 1.0, -2.0, 0.5, 3.0;
  Eigen::VectorXd z = Eigen::VectorXd::Zero(4);
  Eigen::VectorXd p = p0;
  AdamState ast(4);
  adam_step(ast, p, z);
  CHECK((p - p0).cwiseAbs().maxCoeff() == 0.0);
  RmsPropState rst(4);
  rmsprop_step(rst, p, z);
  CHECK((p - p0).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("both optimizers minimize a quadratic from a distant start") {
  // f(x) = ||x||², grad = 2x, start at 5·1.
  auto run = [](auto&& stepper) {
    Eigen::VectorXd x = Eigen::VectorXd::Constant(6, 5.0);
    for (int it = 0; it < 2000; ++it) {
      Eigen::VectorXd g = 2.0 * x;
      stepper(x, g);
      if (x.norm() < 1e-3) return it;
    }
    return 2000;
  };
  AdamState ast(6, AdamConfig{0.01, 0.9, 0.999, 1e-8});
  int adam_iters = run([&](auto& x, const auto& g) { adam_step(ast, x, g); });
  CHECK(adam_iters < 2000);
  RmsPropState rst(6, RmsPropConfig{0.01, 0.9, 1e-8});
  int rms_iters = run([&](auto& x, const auto& g) { rmsprop_step(rst, x, g); });
  CHECK(rms_iters < 2000);
}

TEST_CASE("non-finite gradients raise a fault") {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(2);
  Eigen::VectorXd bad(2);
  bad << 1.0, std::numeric_limits<double>::quiet_NaN();
  AdamState ast(2);
  CHECK_THROWS_AS(adam_step(ast, p, bad), RuntimeFault);
  RmsPropState rst(2);
  bad[1] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(rmsprop_step(rst, p, bad), RuntimeFault);
}

TEST_CASE("optimizer updates are deterministic in (state, params, grads)") {
  Eigen::VectorXd g(3);
  g << 0.3, -0.7, 1.1;
  Eigen::VectorXd pa = Eigen::VectorXd::Ones(3), pb = Eigen::VectorXd::Ones(3);
  AdamState sa(3), sb(3);
  for (int i = 0; i < 5; ++i) {
    adam_step(sa, pa, g);
    adam_step(sb, pb, g);
  }
  CHECK((pa - pb).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("weight clipping clamps, preserves in-range values, idempotent") {
  Eigen::VectorXd p(4);
  p << 0.005, -0.02, 0.02, 0.0001;
  Eigen::VectorXd before = p;
  clip_weights(p, 0.01);
  CHECK(p[0] == before[0]);
  CHECK(p[1] == -0.01);
  CHECK(p[2] == 0.01);
  CHECK(p[3] == before[3]);
  Eigen::VectorXd once = p;
  clip_weights(p, 0.01);
  CHECK((p - once).cwiseAbs().maxCoeff() == 0.0);
  CHECK(p.cwiseAbs().maxCoeff() <= 0.01);
  CHECK_THROWS_AS(clip_weights(p, 0.0), ConfigError);
}

TEST_CASE("softplus is stable and positive across the real line") {
  CHECK(stable_softplus(0.0) == doctest::Approx(0.6931471805599453).epsilon(1e-15));
  CHECK(stable_softplus(100.0) == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(stable_softplus(-100.0) > 0.0);
  CHECK(std::isfinite(stable_softplus(800.0)));
  CHECK(stable_softplus(800.0) == doctest::Approx(800.0).epsilon(1e-12));
  // Monotone increasing.
  double prev = stable_softplus(-40.0);
  for (double x = -39.0; x <= 40.0; x += 1.0) {
    double cur = stable_softplus(x);
    CHECK(cur > prev);
    prev = cur;
  }
}

TEST_CASE("softmax sums to one and ignores constant shifts") {
  Rng rng(99);
  for (int inst = 0; inst < 100; ++inst) {
    Eigen::VectorXd logits(4);
    for (int i = 0; i < 4; ++i) logits[i] = rng.uniform(-50.0, 50.0);
    Eigen::VectorXd p = softmax(logits);
    CHECK(std::abs(p.sum() - 1.0) <= 1e-12);
    CHECK(p.minCoeff() >= 0.0);
    Eigen::VectorXd q = softmax(logits.array() + 123.456);
    CHECK((p - q).cwiseAbs().maxCoeff() <= 1e-9);
  }
  // Extreme logits do not overflow.
  Eigen::VectorXd big(3);
  big << 1000.0, 998.0, -1000.0;
  Eigen::VectorXd p = softmax(big);
  CHECK(std::isfinite(p.sum()));
  CHECK(p[0] > p[1]);
}

TEST_CASE("entropy endpoints on the 4-simplex") {
  Eigen::VectorXd uniform = Eigen::VectorXd::Constant(4, 0.25);
  CHECK(entropy(uniform) == doctest::Approx(1.3862943611198906).epsilon(1e-15));
  Eigen::VectorXd onehot = Eigen::VectorXd::Zero(4);
  onehot[2] = 1.0;
  CHECK(entropy(onehot) == 0.0);
  Rng rng(17);
  for (int inst = 0; inst < 50; ++inst) {
    Eigen::VectorXd l(4);
    for (int i = 0; i < 4; ++i) l[i] = rng.normal();
    double h = entropy(softmax(l));
    CHECK(h >= 0.0);
    CHECK(h <= 1.3862943611198906 + 1e-12);
  }
}

TEST_CASE("cross entropy scalar oracle and clamping flag") {
  Eigen::VectorXd p(4);
  p << 0.7, 0.1, 0.1, 0.1;
  bool clamped = true;
  CHECK(cross_entropy(p, 0, &clamped) == doctest::Approx(0.35667494393873245).epsilon(1e-15));
  CHECK_FALSE(clamped);
  Eigen::VectorXd q(4);
  q << 0.0, 0.5, 0.25, 0.25;
  double ce = cross_entropy(q, 0, &clamped);
  CHECK(clamped);
  CHECK(ce == doctest::Approx(-std::log(1e-8)).epsilon(1e-12));
  // CE is zero iff all mass sits on the label.
  Eigen::VectorXd onehot = Eigen::VectorXd::Zero(4);
  onehot[1] = 1.0;
  CHECK(cross_entropy(onehot, 1) == 0.0);
  CHECK(cross_entropy(p, 1) > 0.0);
  CHECK_THROWS_AS(cross_entropy(p, 7), RuntimeFault);
}

TEST_CASE("gaussian logprob closed form, stationarity, and fd gradients") {
  Eigen::VectorXd mean(2), sigma(2);
  mean << 0.4, -1.2;
  sigma << 1.0, 1.0;
  GaussianLogProb at_mean = gaussian_logprob(mean, mean, sigma);
  CHECK(at_mean.value == doctest::Approx(-1.8378770664093453).epsilon(1e-15));
  CHECK(at_mean.d_action.cwiseAbs().maxCoeff() == 0.0);

  Rng rng(31);
  const double h = 1e-6;
  for (int inst = 0; inst < 100; ++inst) {
    Eigen::VectorXd a(2), m(2), ls(2);
    for (int i = 0; i < 2; ++i) {
      a[i] = rng.normal();
      m[i] = rng.normal();
      ls[i] = rng.uniform(-1.5, 0.5);
    }
    Eigen::VectorXd s = ls.array().exp();
    GaussianLogProb out = gaussian_logprob(a, m, s);
    for (int i = 0; i < 2; ++i) {
      Eigen::VectorXd mp = m, mn = m;
      mp[i] += h;
      mn[i] -= h;
      double fd = (gaussian_logprob(a, mp, s).value - gaussian_logprob(a, mn, s).value) /
                  (2.0 * h);
      CHECK(std::abs(out.d_mean[i] - fd) <= 1e-5 * std::max(1.0, std::abs(fd)));

      Eigen::VectorXd lp = ls, ln = ls;
      lp[i] += h;
      ln[i] -= h;
      double fd_ls = (gaussian_logprob(a, m, lp.array().exp().matrix()).value -
                      gaussian_logprob(a, m, ln.array().exp().matrix()).value) /
                     (2.0 * h);
      CHECK(std::abs(out.d_log_sigma[i] - fd_ls) <= 1e-5 * std::max(1.0, std::abs(fd_ls)));

      Eigen::VectorXd ap = a, an = a;
      ap[i] += h;
      an[i] -= h;
      double fd_a = (gaussian_logprob(ap, m, s).value - gaussian_logprob(an, m, s).value) /
                    (2.0 * h);
      CHECK(std::abs(out.d_action[i] - fd_a) <= 1e-5 * std::max(1.0, std::abs(fd_a)));
    }
  }

  Eigen::VectorXd bad(2);
  bad << 1.0, -0.5;
  CHECK_THROWS_AS(gaussian_logprob(mean, mean, bad), RuntimeFault);
}

TEST_CASE("diagonal gaussian kl scalar oracle") {
  Eigen::VectorXd m0(1), s0(1), m1(1), s1(1);
  m0 << 0.0;
  s0 << 1.0;
  m1 << 1.0;
  s1 << 2.0;
  // KL(N(0,1) || N(1,4)) = log 2 + (1 + 1)/8 - 1/2 = log 2 - 1/4.
  CHECK(diag_gauss_kl(m0, s0, m1, s1) ==
        doctest::Approx(0.6931471805599453 - 0.25).epsilon(1e-15));
  CHECK(diag_gauss_kl(m0, s0, m0, s0) == doctest::Approx(0.0).epsilon(1e-15));
  // Nonnegative on random pairs, zero only at identity.
  Rng rng(13);
  for (int inst = 0; inst < 100; ++inst) {
    Eigen::VectorXd a0(2), b0(2), a1(2), b1(2);
    for (int i = 0; i < 2; ++i) {
      a0[i] = rng.normal();
      a1[i] = rng.normal();
      b0[i] = std::exp(rng.uniform(-1.0, 1.0));
      b1[i] = std::exp(rng.uniform(-1.0, 1.0));
    }
    CHECK(diag_gauss_kl(a0, b0, a1, b1) >= -1e-12);
  }
}
