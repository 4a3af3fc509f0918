#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "core/dataset.hpp"
#include "core/errors.hpp"
#include "core/metrics.hpp"
#include "core/rng.hpp"

using namespace burngail;

namespace {

TrackGeometry default_track() { return build_oval_track(100.0, 30.0, 2, 3.0); }

DatasetSpec small_spec() {
  DatasetSpec spec;
  spec.n_vehicles = 6;
  spec.burn_in_steps = 15;
  spec.continuation_steps = 60;
  spec.seed = 9100;
  return spec;
}

std::vector<Demonstration> make_demos(int count) {
  TrackGeometry track = default_track();
  SimParams sim;
  return generate_demos(track, sim, ObsStandardization{}, SteerGains{}, StyleTable::defaults(),
                        small_spec(), 0, count, 2);
}

// Straightforward mutual information / entropy, written independently of the
// implementation under test.
double plain_mi(const std::vector<int>& a, const std::vector<int>& b) {
  const int ka = 1 + *std::max_element(a.begin(), a.end());
  const int kb = 1 + *std::max_element(b.begin(), b.end());
  const double n = static_cast<double>(a.size());
  std::vector<std::vector<int>> t(ka, std::vector<int>(kb, 0));
  std::vector<int> ra(ka, 0), cb(kb, 0);
  for (size_t i = 0; i < a.size(); ++i) {
    t[a[i]][b[i]]++;
    ra[a[i]]++;
    cb[b[i]]++;
  }
  double mi = 0.0;
  for (int i = 0; i < ka; ++i)
    for (int j = 0; j < kb; ++j)
      if (t[i][j] > 0)
        mi += (t[i][j] / n) * std::log(n * t[i][j] / (double(ra[i]) * cb[j]));
  return mi;
}

double plain_entropy(const std::vector<int>& a) {
  const int k = 1 + *std::max_element(a.begin(), a.end());
  const double n = static_cast<double>(a.size());
  std::vector<int> c(k, 0);
  for (int x : a) c[x]++;
  double h = 0.0;
  for (int i = 0; i < k; ++i)
    if (c[i] > 0) h -= (c[i] / n) * std::log(c[i] / n);
  return h;
}

// Expected MI under the permutation model by exhaustive enumeration: every
// distinct rearrangement of `a` is equally likely, so the mean MI over all of
// them is the exact expectation the analytic formula must reproduce.
double brute_force_ami(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> perm(a);
  std::sort(perm.begin(), perm.end());
  double sum = 0.0;
  long count = 0;
  do {
    sum += plain_mi(perm, b);
    ++count;
  } while (std::next_permutation(perm.begin(), perm.end()));
  const double emi = sum / static_cast<double>(count);
  const double denom = std::max(plain_entropy(a), plain_entropy(b)) - emi;
  return (plain_mi(a, b) - emi) / denom;
}

std::string file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string temp_path(const char* name) { return std::string("/tmp/bg_metrics_") + name; }

}  // namespace

TEST_CASE("ami: identical and relabeled partitions score exactly 1") {
  std::vector<int> a = {0, 0, 1, 1, 2, 2, 3, 3, 1, 0};
  CHECK(adjusted_mutual_information(a, a).score == 1.0);
  std::vector<int> renamed(a.size());
  for (size_t i = 0; i < a.size(); ++i) renamed[i] = 7 - a[i];  // permute label names
  CHECK(adjusted_mutual_information(a, renamed).score == 1.0);
  CHECK_FALSE(adjusted_mutual_information(a, a).degenerate);
}

TEST_CASE("ami: hand-derived value for the canonical independent 2x2 case") {
  // true=(0,0,1,1), pred=(0,1,0,1): MI = 0 and the permutation model gives
  // E[MI] = log(2)/3 (counts 0/1/2 with probabilities 1/6, 4/6, 1/6 and MI
  // log2, 0, log2), so AMI = -(log2/3) / (log2 - log2/3) = -1/2.
  AmiResult r = adjusted_mutual_information({0, 1, 0, 1}, {0, 0, 1, 1});
  CHECK(r.score == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK_FALSE(r.degenerate);
}

TEST_CASE("ami: exact expectation matches exhaustive permutation enumeration") {
  Rng rng(801);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 4 + rng.uniform_int(5);  // up to 8! = 40320 arrangements
    const int k = 2 + rng.uniform_int(2);
    std::vector<int> a(n), b(n);
    for (int i = 0; i < n; ++i) {
      a[i] = rng.uniform_int(k);
      b[i] = rng.uniform_int(k);
    }
    if (*std::max_element(a.begin(), a.end()) == *std::min_element(a.begin(), a.end()) &&
        *std::max_element(b.begin(), b.end()) == *std::min_element(b.begin(), b.end()))
      continue;  // both trivial: degenerate by definition, tested separately
    const double expect = brute_force_ami(a, b);
    const double got = adjusted_mutual_information(a, b).score;
    CHECK(std::abs(got - std::min(expect, 1.0)) < 1e-10);
  }
}

TEST_CASE("ami: symmetric in its arguments") {
  Rng rng(802);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<int> a(30), b(30);
    for (int i = 0; i < 30; ++i) {
      a[i] = rng.uniform_int(4);
      b[i] = rng.uniform_int(3);
    }
    CHECK(adjusted_mutual_information(a, b).score ==
          doctest::Approx(adjusted_mutual_information(b, a).score).epsilon(1e-12));
  }
}

TEST_CASE("ami: degenerate and constant-predictor cases") {
  AmiResult both = adjusted_mutual_information({1, 1, 1}, {2, 2, 2});
  CHECK(both.score == 0.0);
  CHECK(both.degenerate);

  AmiResult constant = adjusted_mutual_information({0, 0, 0, 0}, {0, 1, 2, 3});
  CHECK(constant.score == 0.0);
  CHECK_FALSE(constant.degenerate);
}

TEST_CASE("ami: near zero for independent random labelings at validation scale") {
  for (uint64_t seed : {11u, 12u, 13u}) {
    Rng rng(seed);
    std::vector<int> a(480), b(480);
    for (int i = 0; i < 480; ++i) {
      a[i] = rng.uniform_int(4);
      b[i] = rng.uniform_int(4);
    }
    AmiResult r = adjusted_mutual_information(a, b);
    CHECK(std::abs(r.score) < 0.05);
    CHECK(r.score <= 1.0);
  }
}

TEST_CASE("ami: input validation") {
  CHECK_THROWS_AS(adjusted_mutual_information({}, {}), RuntimeFault);
  CHECK_THROWS_AS(adjusted_mutual_information({0, 1}, {0}), RuntimeFault);
}

TEST_CASE("kmeans: single cluster returns the mean") {
  Rng rng(803);
  Eigen::MatrixXd pts(20, 3);
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 3; ++j) pts(i, j) = rng.normal();
  KmeansResult res = kmeans_cluster(pts, 1, 5, 2);
  for (int l : res.labels) CHECK(l == 0);
  for (int j = 0; j < 3; ++j)
    CHECK(res.centroids(0, j) == doctest::Approx(pts.col(j).mean()).epsilon(1e-12));
}

TEST_CASE("kmeans: recovers well-separated blobs") {
  Rng rng(804);
  const int per = 50, d = 5;
  Eigen::MatrixXd pts(4 * per, d);
  std::vector<int> truth(4 * per);
  for (int c = 0; c < 4; ++c) {
    for (int i = 0; i < per; ++i) {
      for (int j = 0; j < d; ++j) pts(c * per + i, j) = (j == c ? 10.0 : 0.0) + 0.5 * rng.normal();
      truth[c * per + i] = c;
    }
  }
  KmeansResult res = kmeans_cluster(pts, 4, 99, 5);
  CHECK(adjusted_mutual_information(res.labels, truth).score > 0.99);
}

TEST_CASE("kmeans: duplicated points share labels and runs are deterministic") {
  Rng rng(805);
  Eigen::MatrixXd base(30, 4);
  for (int i = 0; i < 30; ++i)
    for (int j = 0; j < 4; ++j) base(i, j) = rng.normal();
  Eigen::MatrixXd doubled(60, 4);
  doubled << base, base;
  KmeansResult res = kmeans_cluster(doubled, 3, 7, 3);
  for (int i = 0; i < 30; ++i) CHECK(res.labels[i] == res.labels[i + 30]);

  KmeansResult again = kmeans_cluster(doubled, 3, 7, 3);
  CHECK(res.labels == again.labels);
  CHECK(res.wcss == again.wcss);
}

TEST_CASE("kmeans: more restarts never worsen the objective") {
  Rng rng(806);
  Eigen::MatrixXd pts(80, 2);
  for (int i = 0; i < 80; ++i)
    for (int j = 0; j < 2; ++j) pts(i, j) = rng.normal();
  double one = kmeans_cluster(pts, 4, 31, 1).wcss;
  double eight = kmeans_cluster(pts, 4, 31, 8).wcss;
  CHECK(eight <= one + 1e-12);
}

TEST_CASE("kmeans: degenerate inputs") {
  Eigen::MatrixXd pts(6, 2);
  pts << 0, 0, 0, 0, 0, 0, 5, 5, 5, 5, 5, 5;  // two distinct locations
  KmeansResult res = kmeans_cluster(pts, 4, 3, 2);
  CHECK(res.labels.size() == 6);
  for (int l : res.labels) {
    CHECK(l >= 0);
    CHECK(l < 4);
  }
  CHECK(std::isfinite(res.wcss));

  CHECK_THROWS_AS(kmeans_cluster(pts, 7, 3, 2), ConfigError);
  CHECK_THROWS_AS(kmeans_cluster(pts, 0, 3, 2), ConfigError);
  CHECK_THROWS_AS(kmeans_cluster(Eigen::MatrixXd(0, 2), 1, 3, 2), ConfigError);
  CHECK_THROWS_AS(kmeans_cluster(pts, 2, 3, 0), ConfigError);
}

TEST_CASE("demo labeling pipelines produce one label per demonstration") {
  std::vector<Demonstration> demos = make_demos(8);
  std::vector<int> km = kmeans_demo_labels(demos, 4, 21, 2);
  CHECK(km.size() == demos.size());
  for (int l : km) {
    CHECK(l >= 0);
    CHECK(l < 4);
  }
  CHECK(km == kmeans_demo_labels(demos, 4, 21, 2));

  SimParams sim;
  InferenceNet net(observation_dim(sim), 16);  // zero params: uniform posterior
  std::vector<int> votes = inference_demo_labels(net, demos);
  for (int l : votes) CHECK(l == 0);  // uniform posterior ties break to class 0

  AmiResult r = validation_ami(net, demos);
  CHECK(r.score == 0.0);  // constant predictor carries no information
  CHECK_FALSE(r.degenerate);

  CHECK(true_demo_labels(demos)[3] == 3 % kNumStyles);
}

TEST_CASE("code mode selection follows the algorithm name") {
  CHECK(code_mode_for("burn_infogail") == CodeMode::BurnInference);
  CHECK(code_mode_for("infogail") == CodeMode::Uniform);
  CHECK(code_mode_for("gail") == CodeMode::None);
  CHECK_THROWS_AS(code_mode_for("wgail"), ConfigError);
}

TEST_CASE("rmse: expert playback reproduces the continuation with zero error") {
  TrackGeometry track = default_track();
  SimParams sim;
  std::vector<Demonstration> demos = make_demos(6);
  RmseCurves curves = rmse_eval(track, sim, ObsStandardization{}, SteerGains{}, nullptr,
                                nullptr, demos, 4, 60, CodeMode::None, 77, 1);
  CHECK(curves.speed.size() == 61);
  CHECK(curves.pos.size() == 61);
  CHECK_FALSE(curves.resampled);
  for (double v : curves.speed) CHECK(v == 0.0);
  for (double v : curves.pos) CHECK(v == 0.0);
}

TEST_CASE("rmse: constant-speed policy matches the closed-form speed curve") {
  TrackGeometry track = default_track();
  SimParams sim;
  std::vector<Demonstration> demos = make_demos(6);
  // Zero parameters → mean action (0, 0): the ego keeps its handoff speed.
  Policy frozen(observation_dim(sim), 8, 4, 8, 0.5);

  const int horizon = 60;
  RmseCurves curves = rmse_eval(track, sim, ObsStandardization{}, SteerGains{}, &frozen,
                                nullptr, demos, static_cast<int>(demos.size()), horizon,
                                CodeMode::None, 77, 2);
  CHECK(curves.speed[0] == 0.0);
  CHECK(curves.pos[0] == 0.0);
  // Using all demos makes the mean independent of the sampling permutation.
  for (int t = 1; t <= horizon; ++t) {
    double acc = 0.0;
    for (const Demonstration& d : demos) {
      const double vh = d.handoff_scene.vehicles[d.handoff_scene.ego_index].speed;
      const double dv = d.expert_continuation[t - 1].v - vh;
      acc += dv * dv;
    }
    CHECK(curves.speed[t] ==
          doctest::Approx(std::sqrt(acc / demos.size())).epsilon(1e-9));
  }
}

TEST_CASE("rmse: worker count does not change the curves") {
  TrackGeometry track = default_track();
  SimParams sim;
  std::vector<Demonstration> demos = make_demos(5);
  Policy frozen(observation_dim(sim), 8, 4, 8, 0.5);
  RmseCurves a = rmse_eval(track, sim, ObsStandardization{}, SteerGains{}, &frozen, nullptr,
                           demos, 5, 40, CodeMode::None, 31, 1);
  RmseCurves b = rmse_eval(track, sim, ObsStandardization{}, SteerGains{}, &frozen, nullptr,
                           demos, 5, 40, CodeMode::None, 31, 3);
  REQUIRE(a.speed.size() == b.speed.size());
  CHECK(std::memcmp(a.speed.data(), b.speed.data(), a.speed.size() * sizeof(double)) == 0);
  CHECK(std::memcmp(a.pos.data(), b.pos.data(), a.pos.size() * sizeof(double)) == 0);
}

TEST_CASE("rmse: oversampling flags replacement, horizon overrun faults") {
  TrackGeometry track = default_track();
  SimParams sim;
  std::vector<Demonstration> demos = make_demos(3);
  RmseCurves curves = rmse_eval(track, sim, ObsStandardization{}, SteerGains{}, nullptr,
                                nullptr, demos, 10, 30, CodeMode::None, 5, 2);
  CHECK(curves.resampled);
  CHECK(curves.n_rollouts == 10);

  CHECK_THROWS_AS(rmse_eval(track, sim, ObsStandardization{}, SteerGains{}, nullptr, nullptr,
                            demos, 3, 61, CodeMode::None, 5, 1),
                  RuntimeFault);
}

TEST_CASE("event frequencies: clean experts vs a full-throttle policy") {
  TrackGeometry track = default_track();
  SimParams sim;
  std::vector<Demonstration> demos = make_demos(4);

  EventFractions expert = event_frequencies(track, sim, ObsStandardization{}, SteerGains{},
                                            nullptr, nullptr, demos, 4, 60, CodeMode::None,
                                            17, 2);
  CHECK(expert.offroad == 0.0);
  CHECK(expert.collision == 0.0);
  CHECK(expert.reversal == 0.0);

  // Constant full-throttle, zero-turn policy: poke the head's output bias.
  Policy runaway(observation_dim(sim), 8, 4, 8, 0.5);
  NamedSegment head = runaway.segments()[2];
  runaway.params()[head.offset + head.size - kActionDim] = sim.accel_max;
  EventFractions wild = event_frequencies(track, sim, ObsStandardization{}, SteerGains{},
                                          &runaway, nullptr, demos, 4, 300, CodeMode::None,
                                          17, 2);
  CHECK(wild.offroad > 0.5);
  CHECK(wild.offroad <= 1.0);
  CHECK(wild.collision >= 0.0);
  CHECK(wild.reversal >= 0.0);
}

TEST_CASE("csv and trajectory exports are well-formed and reproducible") {
  TrackGeometry track = default_track();
  SimParams sim;
  std::vector<Demonstration> demos = make_demos(4);

  RmseCurves curves;
  curves.speed = {0.0, 0.5, 1.0};
  curves.pos = {0.0, 1.5, 2.25};
  curves.n_rollouts = 2;
  const std::string rmse_path = temp_path("rmse.csv");
  write_rmse_csv(rmse_path, curves);
  std::string rmse = file_bytes(rmse_path);
  CHECK(rmse.rfind("t,rmse_speed,rmse_pos\n0,0,0\n", 0) == 0);

  const std::string events_path = temp_path("events.csv");
  write_events_csv(events_path, {0.125, 0.0, 1.0});
  CHECK(file_bytes(events_path) == "offroad,collision,reversal\n0.125,0,1\n");

  const std::string ami_path = temp_path("ami.csv");
  write_ami_csv(ami_path, {{"kmeans", "val", 0.0}, {"inference", "val", 0.5}});
  CHECK(file_bytes(ami_path) ==
        "method,split,ami\nkmeans,val,0\ninference,val,0.5\n");

  Rng rng(881);
  Policy policy(observation_dim(sim), 16, 16, 16, 0.5);
  policy.init(rng);
  const std::string emb_path = temp_path("embedding.csv");
  write_embedding_csv(emb_path, policy);
  std::istringstream emb(file_bytes(emb_path));
  std::string line;
  int rows = 0;
  while (std::getline(emb, line)) {
    CHECK(std::count(line.begin(), line.end(), ',') == 15);
    ++rows;
  }
  CHECK(rows == kCodeDim);

  const std::string traj_path = temp_path("traj.jsonl");
  write_trajectories_jsonl(traj_path, track, sim, ObsStandardization{}, SteerGains{}, policy,
                           demos, 3, 20, 99);
  std::string blob = file_bytes(traj_path);
  CHECK(std::count(blob.begin(), blob.end(), '\n') == kCodeDim * 3 * 21);
  write_trajectories_jsonl(traj_path, track, sim, ObsStandardization{}, SteerGains{}, policy,
                           demos, 3, 20, 99);
  CHECK(file_bytes(traj_path) == blob);

  std::remove(rmse_path.c_str());
  std::remove(events_path.c_str());
  std::remove(ami_path.c_str());
  std::remove(emb_path.c_str());
  std::remove(traj_path.c_str());
}
