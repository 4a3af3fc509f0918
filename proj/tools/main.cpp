// Command-line front end. Everything goes through the C API in burngail.h;
// configuration is layered as: built-in defaults < --config file < --set
// KEY=VALUE pairs (in order) < named flags.
#include <burngail.h>

#include <CLI11.hpp>

#include <cstdio>
#include <map>
#include <string>
#include <vector>

namespace {

struct ConfigHandle {
  bg_config* cfg;
  ConfigHandle() : cfg(bg_config_create()) {}
  ~ConfigHandle() { bg_config_free(cfg); }
  ConfigHandle(const ConfigHandle&) = delete;
  ConfigHandle& operator=(const ConfigHandle&) = delete;
};

// One subcommand's flag state. Named flags map onto dotted config keys; the
// map gives each captured value a stable address for CLI11 to bind to.
struct SubCmd {
  CLI::App* cmd = nullptr;
  std::string config_path;
  std::vector<std::string> sets;
  std::map<std::string, std::string> values;  // dotted key -> raw flag text
  std::map<std::string, CLI::Option*> opts;
  bool force = false;
  std::string checkpoint;
};

CLI::Option* keyed(SubCmd& sc, const std::string& flag, const std::string& key,
                   const std::string& desc) {
  CLI::Option* opt = sc.cmd->add_option(flag, sc.values[key], desc + " [" + key + "]");
  sc.opts[key] = opt;
  return opt;
}

void base_flags(SubCmd& sc) {
  sc.cmd->add_option("--config", sc.config_path, "JSON config file layered over the defaults");
  sc.cmd
      ->add_option("--set", sc.sets,
                   "extra dotted-key override, KEY=VALUE (repeatable, applied in order)")
      ->expected(-1);
  keyed(sc, "--seed", "seed", "run seed; every random stream derives from it");
  keyed(sc, "--run-dir", "run_dir", "run directory holding dataset, checkpoints, artifacts");
  keyed(sc, "--workers", "workers", "worker threads; never changes the outputs");
}

int fail(bg_status status) {
  std::fprintf(stderr, "burngail: %s\n", bg_last_error());
  return static_cast<int>(status);
}

int build_config(SubCmd& sc, bg_config* cfg) {
  if (!sc.config_path.empty()) {
    if (bg_status s = bg_config_load_file(cfg, sc.config_path.c_str()); s != BG_OK)
      return fail(s);
  }
  for (const std::string& kv : sc.sets) {
    const size_t eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      std::fprintf(stderr, "burngail: --set expects KEY=VALUE, got \"%s\"\n", kv.c_str());
      return static_cast<int>(BG_CONFIG_ERROR);
    }
    if (bg_status s = bg_config_set(cfg, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str());
        s != BG_OK)
      return fail(s);
  }
  for (const auto& [key, opt] : sc.opts) {
    if (opt->count() == 0) continue;
    if (bg_status s = bg_config_set(cfg, key.c_str(), sc.values[key].c_str()); s != BG_OK)
      return fail(s);
  }
  return 0;
}

// Reads one string field back out of the resolved-config JSON (our own
// serializer, so the quoting is fixed).
std::string resolved_field(bg_config* cfg, const std::string& name) {
  char* js = nullptr;
  if (bg_config_resolved(cfg, &js) != BG_OK || !js) return "";
  std::string text(js);
  bg_string_free(js);
  const std::string needle = "\"" + name + "\": \"";
  const size_t at = text.find(needle);
  if (at == std::string::npos) return "";
  const size_t start = at + needle.size();
  const size_t end = text.find('"', start);
  return end == std::string::npos ? "" : text.substr(start, end - start);
}

int print_summary(char* summary) {
  if (summary) {
    std::printf("%s\n", summary);
    bg_string_free(summary);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string("burngail ") + bg_version() +
               " — driving-style imitation learning on an oval track"};
  app.require_subcommand(1);

  SubCmd gen;
  gen.cmd = app.add_subcommand("gen-demos", "generate the expert demonstration dataset");
  base_flags(gen);
  keyed(gen, "--n-train", "experts.n_train", "training demonstrations");
  keyed(gen, "--n-val", "experts.n_val", "validation demonstrations");
  gen.cmd->add_flag("--force", gen.force, "overwrite an existing dataset");

  SubCmd train;
  train.cmd = app.add_subcommand("train", "adversarial training (resumes a started run)");
  base_flags(train);
  keyed(train, "--algorithm", "trainer.algorithm", "gail | infogail | burn_infogail");
  keyed(train, "--lambda", "trainer.lambda", "entropy-regularizer weight");
  keyed(train, "--eta", "trainer.eta", "style-reward weight");
  keyed(train, "--iters", "trainer.iterations", "total training iterations");

  SubCmd eval;
  eval.cmd = app.add_subcommand("eval", "evaluate a checkpoint on the validation split");
  base_flags(eval);
  keyed(eval, "--algorithm", "trainer.algorithm", "algorithm the checkpoint was trained with");
  keyed(eval, "--n-rollouts", "eval.n_rollouts", "evaluation rollouts");
  eval.cmd->add_option("--checkpoint", eval.checkpoint,
                       "checkpoint file (default: latest in <run-dir>/checkpoints)");

  SubCmd exp;
  exp.cmd = app.add_subcommand("export", "export plotting artifacts for a checkpoint");
  base_flags(exp);
  exp.cmd->add_option("--checkpoint", exp.checkpoint,
                      "checkpoint file (default: latest in <run-dir>/checkpoints)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(BG_CONFIG_ERROR);
  }

  ConfigHandle handle;
  SubCmd& sc = gen.cmd->parsed() ? gen : train.cmd->parsed() ? train
                                   : eval.cmd->parsed()      ? eval
                                                             : exp;
  if (int rc = build_config(sc, handle.cfg); rc != 0) return rc;

  char* summary = nullptr;
  bg_status status = BG_OK;
  if (gen.cmd->parsed()) {
    status = bg_gen_demos(handle.cfg, gen.force ? 1 : 0, &summary);
  } else if (train.cmd->parsed()) {
    bool lambda_given = train.opts["trainer.lambda"]->count() > 0;
    for (const std::string& kv : train.sets)
      if (kv.rfind("trainer.lambda=", 0) == 0) lambda_given = true;
    if (lambda_given && resolved_field(handle.cfg, "algorithm") == "gail")
      std::fprintf(stderr, "warning: trainer.lambda has no effect with algorithm gail\n");
    status = bg_train(handle.cfg, &summary);
  } else if (eval.cmd->parsed()) {
    status = bg_eval(handle.cfg, eval.checkpoint.c_str(), &summary);
  } else {
    status = bg_export(handle.cfg, exp.checkpoint.c_str(), &summary);
  }

  if (status != BG_OK) {
    if (summary) bg_string_free(summary);
    return fail(status);
  }
  return print_summary(summary);
}
