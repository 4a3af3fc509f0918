#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "core/config.hpp"
#include "core/models.hpp"
#include "core/nn.hpp"

namespace burngail {

// Binary checkpoint container
// ---------------------------
// Layout (all integers little-endian):
//   bytes 0..5   magic "BGCKPT"
//   bytes 6..9   u32 format version (currently 1)
//   bytes 10..17 u64 header length in bytes
//   header       UTF-8 JSON: {"meta": {...}, "arrays": [{"name", "shape",
//                "offset", "size"}]}, offset/size counted in float64 elements
//                relative to the payload start
//   payload      concatenated float64 little-endian array data, header order

struct NamedArray {
  std::string name;
  std::vector<int64_t> shape;
  Eigen::VectorXd data;  // flattened
};

struct Checkpoint {
  nlohmann::json meta;
  std::vector<NamedArray> arrays;
};

void write_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::string& path);

// Lookup by exact name; unknown name → ConfigError listing what is present.
const NamedArray& find_array(const Checkpoint& ckpt, const std::string& name);

// ---------------------------------------------------------------------------
// Model bundle: everything the trainer persists between iterations.

struct ModelBundle {
  Policy policy;
  Critic critic;
  InferenceNet inference;
  RmsPropState critic_opt;
  AdamState inference_opt;
  int64_t iteration = 0;       // iterations completed
  double best_val_ami = -2.0;  // below any attainable AMI
};

// Fresh models/optimizer states shaped by the run config, seeded from the
// run seed (initialization happens on stream "model_init").
ModelBundle build_bundle(const RunConfig& cfg);

void save_bundle(const std::string& path, const ModelBundle& bundle,
                 const RunConfig& cfg);
// Rebuilds from cfg shapes and fills parameters/optimizer state from the
// file; any shape disagreement → ConfigError.
ModelBundle load_bundle(const std::string& path, const RunConfig& cfg);

}  // namespace burngail
