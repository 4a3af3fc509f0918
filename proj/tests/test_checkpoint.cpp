#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "core/checkpoint.hpp"
#include "core/config.hpp"
#include "core/errors.hpp"

using namespace burngail;

namespace {

std::string temp_path(const char* name) {
  return std::string("/tmp/bg_ckpt_test_") + name;
}

}  // namespace

TEST_CASE("checkpoint round trip preserves names, shapes, meta, and bits") {
  Checkpoint ckpt;
  ckpt.meta = {{"iteration", 17}, {"note", "x"}};
  NamedArray a;
  a.name = "alpha";
  a.shape = {2, 3};
  a.data.resize(6);
  a.data << 1.0 / 3.0, -0.0, 3.141592653589793, 1e-308, 1e308, -42.5;
  NamedArray b;
  b.name = "beta";
  b.shape = {4};
  b.data.resize(4);
  b.data << 0.1, 0.2, 0.3, 0.4;
  ckpt.arrays = {a, b};

  std::string path = temp_path("roundtrip.bin");
  write_checkpoint(path, ckpt);
  Checkpoint back = read_checkpoint(path);

  CHECK(back.meta.at("iteration").get<int>() == 17);
  CHECK(back.meta.at("note").get<std::string>() == "x");
  REQUIRE(back.arrays.size() == 2);
  CHECK(back.arrays[0].name == "alpha");
  CHECK(back.arrays[0].shape == std::vector<int64_t>{2, 3});
  CHECK(back.arrays[1].name == "beta");
  for (int i = 0; i < 6; ++i) {
    // Bit-exact: compare representations, not values (catches -0.0).
    uint64_t want, got;
    std::memcpy(&want, &a.data[i], 8);
    std::memcpy(&got, &back.arrays[0].data[i], 8);
    CHECK(want == got);
  }
  std::remove(path.c_str());
}

TEST_CASE("find_array reports missing names with what is present") {
  Checkpoint ckpt;
  NamedArray a;
  a.name = "only";
  a.shape = {1};
  a.data = Eigen::VectorXd::Ones(1);
  ckpt.arrays = {a};
  CHECK(&find_array(ckpt, "only") == &ckpt.arrays[0]);
  CHECK_THROWS_WITH_AS(find_array(ckpt, "nope"),
                       doctest::Contains("no array 'nope'"), ConfigError);
}

TEST_CASE("reader rejects garbage, stale versions, and truncation") {
  std::string path = temp_path("garbage.bin");
  {
    std::ofstream out(path, std::ios::binary);
    out << "definitely not a checkpoint";
  }
  CHECK_THROWS_AS(read_checkpoint(path), ConfigError);

  // Valid file, then truncate the payload.
  Checkpoint ckpt;
  NamedArray a;
  a.name = "w";
  a.shape = {8};
  a.data = Eigen::VectorXd::LinSpaced(8, 0.0, 7.0);
  ckpt.arrays = {a};
  write_checkpoint(path, ckpt);
  {
    std::ifstream in(path, std::ios::binary);
    std::string blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(blob.data(), static_cast<std::streamsize>(blob.size() - 16));
  }
  CHECK_THROWS_WITH_AS(read_checkpoint(path), doctest::Contains("truncated"), ConfigError);

  CHECK_THROWS_AS(read_checkpoint("/tmp/bg_ckpt_does_not_exist.bin"), RuntimeFault);
  std::remove(path.c_str());
}

TEST_CASE("writer rejects inconsistent shape metadata") {
  Checkpoint ckpt;
  NamedArray a;
  a.name = "bad";
  a.shape = {3, 3};
  a.data = Eigen::VectorXd::Zero(8);  // 3x3 says 9
  ckpt.arrays = {a};
  CHECK_THROWS_AS(write_checkpoint(temp_path("bad.bin"), ckpt), ConfigError);
}

TEST_CASE("model bundle round trip restores every parameter and optimizer state") {
  RunConfig cfg = RunConfig::defaults();
  ModelBundle b = build_bundle(cfg);
  b.iteration = 33;
  b.best_val_ami = 0.42;
  // Make the state distinctive.
  b.critic.params().setLinSpaced(b.critic.param_count(), -0.01, 0.01);
  b.critic_opt.sq.setConstant(0.125);
  b.inference_opt.m.setConstant(-0.25);
  b.inference_opt.v.setConstant(0.5);
  b.inference_opt.step = 7;

  std::string path = temp_path("bundle.bin");
  save_bundle(path, b, cfg);
  ModelBundle r = load_bundle(path, cfg);

  CHECK(r.iteration == 33);
  CHECK(r.best_val_ami == doctest::Approx(0.42));
  CHECK((r.policy.params() - b.policy.params()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((r.critic.params() - b.critic.params()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((r.inference.params() - b.inference.params()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((r.critic_opt.sq - b.critic_opt.sq).cwiseAbs().maxCoeff() == 0.0);
  CHECK((r.inference_opt.m - b.inference_opt.m).cwiseAbs().maxCoeff() == 0.0);
  CHECK((r.inference_opt.v - b.inference_opt.v).cwiseAbs().maxCoeff() == 0.0);
  CHECK(r.inference_opt.step == 7);
  std::remove(path.c_str());
}

TEST_CASE("bundle refuses checkpoints whose shapes do not match the config") {
  RunConfig cfg = RunConfig::defaults();
  ModelBundle b = build_bundle(cfg);
  std::string path = temp_path("bundle_shape.bin");
  save_bundle(path, b, cfg);

  RunConfig other = cfg;
  other.models.trunk_hidden = 32;  // different policy geometry
  CHECK_THROWS_AS(load_bundle(path, other), ConfigError);
  std::remove(path.c_str());
}

TEST_CASE("fresh bundles are deterministic in the seed and differ across seeds") {
  RunConfig cfg = RunConfig::defaults();
  ModelBundle a = build_bundle(cfg);
  ModelBundle b = build_bundle(cfg);
  CHECK((a.policy.params() - b.policy.params()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.inference.params() - b.inference.params()).cwiseAbs().maxCoeff() == 0.0);
  RunConfig cfg2 = cfg;
  cfg2.seed = cfg.seed + 1;
  ModelBundle c = build_bundle(cfg2);
  CHECK((a.policy.params() - c.policy.params()).cwiseAbs().maxCoeff() > 0.0);
}
