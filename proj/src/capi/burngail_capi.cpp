#include "burngail.h"

#include <cstring>
#include <exception>
#include <string>

#include <nlohmann/json.hpp>

#include "core/commands.hpp"
#include "core/config.hpp"
#include "core/errors.hpp"

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void emit(char** out, const nlohmann::ordered_json& j) {
  if (out) *out = dup_string(j.dump(2));
}

// Runs fn, translating the library's exception taxonomy onto status codes.
template <typename Fn>
bg_status guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    fn();
    return BG_OK;
  } catch (const burngail::ConfigError& e) {
    set_error(e.what());
    return BG_CONFIG_ERROR;
  } catch (const burngail::RuntimeFault& e) {
    set_error(e.what());
    return BG_RUNTIME_ERROR;
  } catch (const std::exception& e) {
    set_error(e.what());
    return BG_RUNTIME_ERROR;
  }
}

const burngail::RunConfig* unwrap(const bg_config* cfg) {
  return reinterpret_cast<const burngail::RunConfig*>(cfg);
}

burngail::RunConfig* unwrap(bg_config* cfg) {
  return reinterpret_cast<burngail::RunConfig*>(cfg);
}

bg_status require_config(const bg_config* cfg) {
  if (cfg) return BG_OK;
  set_error("null config handle");
  return BG_CONFIG_ERROR;
}

}  // namespace

extern "C" {

const char* bg_version(void) { return "0.1.0"; }

const char* bg_last_error(void) { return g_last_error.c_str(); }

void bg_string_free(char* s) { delete[] s; }

bg_config* bg_config_create(void) {
  return reinterpret_cast<bg_config*>(new burngail::RunConfig());
}

void bg_config_free(bg_config* cfg) { delete unwrap(cfg); }

bg_status bg_config_load_file(bg_config* cfg, const char* path) {
  if (bg_status s = require_config(cfg); s != BG_OK) return s;
  if (!path) {
    set_error("null config path");
    return BG_CONFIG_ERROR;
  }
  return guarded([&] { *unwrap(cfg) = burngail::load_config_file(path); });
}

bg_status bg_config_set(bg_config* cfg, const char* dotted_key, const char* value) {
  if (bg_status s = require_config(cfg); s != BG_OK) return s;
  if (!dotted_key || !value) {
    set_error("null key or value");
    return BG_CONFIG_ERROR;
  }
  return guarded([&] { burngail::set_config_key(*unwrap(cfg), dotted_key, value); });
}

bg_status bg_config_validate(const bg_config* cfg) {
  if (bg_status s = require_config(cfg); s != BG_OK) return s;
  return guarded([&] { unwrap(cfg)->validate(); });
}

bg_status bg_config_resolved(const bg_config* cfg, char** json_out) {
  if (bg_status s = require_config(cfg); s != BG_OK) return s;
  if (!json_out) {
    set_error("null output parameter");
    return BG_CONFIG_ERROR;
  }
  return guarded([&] { emit(json_out, burngail::config_to_json(*unwrap(cfg))); });
}

bg_status bg_gen_demos(const bg_config* cfg, int force, char** summary_json) {
  if (bg_status s = require_config(cfg); s != BG_OK) return s;
  return guarded([&] {
    burngail::GenDemosResult r = burngail::cmd_gen_demos(*unwrap(cfg), force != 0);
    nlohmann::ordered_json j;
    j["train"] = r.train_path;
    j["val"] = r.val_path;
    j["manifest"] = r.manifest_path;
    j["n_train"] = r.n_train;
    j["n_val"] = r.n_val;
    emit(summary_json, j);
  });
}

bg_status bg_train(const bg_config* cfg, char** summary_json) {
  if (bg_status s = require_config(cfg); s != BG_OK) return s;
  return guarded([&] {
    burngail::TrainResult r = burngail::cmd_train(*unwrap(cfg));
    nlohmann::ordered_json j;
    j["iterations_run"] = r.iterations_run;
    j["total_iterations"] = r.total_iterations;
    j["best_val_ami"] = r.best_val_ami;
    j["final_checkpoint"] = r.final_checkpoint;
    emit(summary_json, j);
  });
}

bg_status bg_eval(const bg_config* cfg, const char* checkpoint, char** summary_json) {
  if (bg_status s = require_config(cfg); s != BG_OK) return s;
  return guarded([&] {
    burngail::EvalResult r = burngail::cmd_eval(*unwrap(cfg), checkpoint ? checkpoint : "");
    nlohmann::ordered_json j;
    j["checkpoint"] = r.checkpoint;
    j["rmse"] = r.rmse_path;
    j["events"] = r.events_path;
    j["ami"] = r.ami_path;
    j["reader_val_ami"] = r.reader_val_ami;
    j["kmeans_val_ami"] = r.kmeans_val_ami;
    j["offroad"] = r.events.offroad;
    j["collision"] = r.events.collision;
    j["reversal"] = r.events.reversal;
    j["resampled"] = r.resampled;
    emit(summary_json, j);
  });
}

bg_status bg_export(const bg_config* cfg, const char* checkpoint, char** summary_json) {
  if (bg_status s = require_config(cfg); s != BG_OK) return s;
  return guarded([&] {
    burngail::ExportResult r = burngail::cmd_export(*unwrap(cfg), checkpoint ? checkpoint : "");
    nlohmann::ordered_json j;
    j["checkpoint"] = r.checkpoint;
    j["trajectories"] = r.trajectories_path;
    j["embedding"] = r.embedding_path;
    j["n_trajectories"] = r.n_trajectories;
    emit(summary_json, j);
  });
}

}  // extern "C"
