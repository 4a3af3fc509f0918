#include "core/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "core/errors.hpp"

namespace burngail {

namespace {

constexpr char kMagic[6] = {'B', 'G', 'C', 'K', 'P', 'T'};
constexpr uint32_t kFormatVersion = 1;

void put_u32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double d) {
  uint64_t bits;
  std::memcpy(&bits, &d, sizeof bits);
  put_u64(out, bits);
}

uint32_t get_u32(const char* p) {
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(static_cast<uint8_t>(p[i])) << (8 * i);
  return v;
}

uint64_t get_u64(const char* p) {
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(static_cast<uint8_t>(p[i])) << (8 * i);
  return v;
}

double get_f64(const char* p) {
  uint64_t bits = get_u64(p);
  double d;
  std::memcpy(&d, &bits, sizeof d);
  return d;
}

int64_t shape_product(const std::vector<int64_t>& shape) {
  int64_t n = 1;
  for (int64_t d : shape) n *= d;
  return n;
}

}  // namespace

void write_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  nlohmann::ordered_json header;
  header["meta"] = ckpt.meta;
  header["arrays"] = nlohmann::ordered_json::array();
  int64_t offset = 0;
  for (const NamedArray& a : ckpt.arrays) {
    if (shape_product(a.shape) != a.data.size())
      throw ConfigError("write_checkpoint: shape of '" + a.name +
                        "' does not match its data length");
    nlohmann::ordered_json e;
    e["name"] = a.name;
    e["shape"] = a.shape;
    e["offset"] = offset;
    e["size"] = a.data.size();
    header["arrays"].push_back(e);
    offset += a.data.size();
  }
  std::string header_str = header.dump();

  std::string blob;
  blob.reserve(18 + header_str.size() + static_cast<size_t>(offset) * 8);
  blob.append(kMagic, sizeof kMagic);
  put_u32(blob, kFormatVersion);
  put_u64(blob, header_str.size());
  blob += header_str;
  for (const NamedArray& a : ckpt.arrays)
    for (Eigen::Index i = 0; i < a.data.size(); ++i) put_f64(blob, a.data[i]);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw RuntimeFault("write_checkpoint: cannot open " + path);
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  if (!out) throw RuntimeFault("write_checkpoint: write failed for " + path);
}

Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RuntimeFault("read_checkpoint: cannot open " + path);
  std::string blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (blob.size() < 18 || std::memcmp(blob.data(), kMagic, sizeof kMagic) != 0)
    throw ConfigError("read_checkpoint: " + path + " is not a checkpoint file");
  uint32_t version = get_u32(blob.data() + 6);
  if (version != kFormatVersion)
    throw ConfigError("read_checkpoint: unsupported format version " +
                      std::to_string(version));
  uint64_t header_len = get_u64(blob.data() + 10);
  if (18 + header_len > blob.size())
    throw ConfigError("read_checkpoint: truncated header in " + path);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(blob.substr(18, header_len));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("read_checkpoint: bad header JSON in " + path + ": " + e.what());
  }

  const char* payload = blob.data() + 18 + header_len;
  int64_t payload_len = static_cast<int64_t>((blob.size() - 18 - header_len) / 8);

  Checkpoint ckpt;
  ckpt.meta = header.value("meta", nlohmann::json::object());
  for (const auto& e : header.at("arrays")) {
    NamedArray a;
    a.name = e.at("name").get<std::string>();
    a.shape = e.at("shape").get<std::vector<int64_t>>();
    int64_t offset = e.at("offset").get<int64_t>();
    int64_t size = e.at("size").get<int64_t>();
    if (size != shape_product(a.shape))
      throw ConfigError("read_checkpoint: shape/size mismatch for '" + a.name + "'");
    if (offset < 0 || size < 0 || offset + size > payload_len)
      throw ConfigError("read_checkpoint: truncated payload for '" + a.name + "'");
    a.data.resize(size);
    for (int64_t i = 0; i < size; ++i) a.data[i] = get_f64(payload + (offset + i) * 8);
    ckpt.arrays.push_back(std::move(a));
  }
  return ckpt;
}

const NamedArray& find_array(const Checkpoint& ckpt, const std::string& name) {
  for (const NamedArray& a : ckpt.arrays)
    if (a.name == name) return a;
  std::string have;
  for (const NamedArray& a : ckpt.arrays) have += (have.empty() ? "" : ", ") + a.name;
  throw ConfigError("checkpoint has no array '" + name + "' (present: " + have + ")");
}

namespace {

NamedArray flat_array(const std::string& name, const Eigen::VectorXd& v) {
  return NamedArray{name, {v.size()}, v};
}

void load_into(const Checkpoint& ckpt, const std::string& name,
               Eigen::Ref<Eigen::VectorXd> dst) {
  const NamedArray& a = find_array(ckpt, name);
  if (a.data.size() != dst.size())
    throw ConfigError("checkpoint array '" + name + "' has " +
                      std::to_string(a.data.size()) + " values but the model expects " +
                      std::to_string(dst.size()));
  dst = a.data;
}

}  // namespace

ModelBundle build_bundle(const RunConfig& cfg) {
  int obs_dim = observation_dim(cfg.sim_params());
  const ModelsConfig& m = cfg.models;
  ModelBundle b;
  b.policy = Policy(obs_dim, m.trunk_hidden, m.embed_dim, m.head_hidden, m.sigma_init);
  b.critic = Critic(obs_dim, m.critic_hidden);
  b.inference = InferenceNet(obs_dim, m.inference_hidden);
  Rng rng(derive_seed(cfg.seed, "model_init"));
  b.policy.init(rng);
  b.critic.init(rng);
  b.inference.init(rng);
  const TrainerConfig& t = cfg.trainer;
  b.critic_opt = RmsPropState(b.critic.param_count(),
                              RmsPropConfig{t.rmsprop_lr, t.rmsprop_rho, t.rmsprop_eps});
  b.inference_opt = AdamState(b.inference.param_count(),
                              AdamConfig{t.adam_lr, t.adam_beta1, t.adam_beta2, t.adam_eps});
  return b;
}

void save_bundle(const std::string& path, const ModelBundle& bundle,
                 const RunConfig& cfg) {
  Checkpoint ckpt;
  ckpt.meta["iteration"] = bundle.iteration;
  ckpt.meta["algorithm"] = cfg.trainer.algorithm;
  ckpt.meta["best_val_ami"] = bundle.best_val_ami;
  ckpt.meta["adam_step"] = bundle.inference_opt.step;
  const Policy& p = bundle.policy;
  for (const NamedSegment& seg : p.segments()) {
    Eigen::VectorXd v = p.params().segment(seg.offset, seg.size);
    if (seg.name == "policy.embed") {
      ckpt.arrays.push_back(NamedArray{seg.name, {p.embed_dim(), kCodeDim}, v});
    } else {
      ckpt.arrays.push_back(flat_array(seg.name, v));
    }
  }
  ckpt.arrays.push_back(flat_array("critic.net", bundle.critic.params()));
  ckpt.arrays.push_back(flat_array("inference.net", bundle.inference.params()));
  ckpt.arrays.push_back(flat_array("opt.critic.sq", bundle.critic_opt.sq));
  ckpt.arrays.push_back(flat_array("opt.inference.m", bundle.inference_opt.m));
  ckpt.arrays.push_back(flat_array("opt.inference.v", bundle.inference_opt.v));
  write_checkpoint(path, ckpt);
}

ModelBundle load_bundle(const std::string& path, const RunConfig& cfg) {
  Checkpoint ckpt = read_checkpoint(path);
  ModelBundle b = build_bundle(cfg);
  for (const NamedSegment& seg : b.policy.segments())
    load_into(ckpt, seg.name, b.policy.params().segment(seg.offset, seg.size));
  load_into(ckpt, "critic.net", b.critic.params());
  load_into(ckpt, "inference.net", b.inference.params());
  load_into(ckpt, "opt.critic.sq", b.critic_opt.sq);
  load_into(ckpt, "opt.inference.m", b.inference_opt.m);
  load_into(ckpt, "opt.inference.v", b.inference_opt.v);
  b.iteration = ckpt.meta.value("iteration", int64_t{0});
  b.best_val_ami = ckpt.meta.value("best_val_ami", -2.0);
  b.inference_opt.step = ckpt.meta.value("adam_step", int64_t{0});
  return b;
}

}  // namespace burngail
