#include "njode/cli.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "njode/errors.hpp"
#include "njode/experiment.hpp"

namespace njode {
namespace {

using nlohmann::json;

json read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
}

struct CommonOpts {
  std::string config;
  std::string variant;
  std::uint64_t seed = 0;
  double scale = 1.0;
  std::string out;
  CLI::Option* seed_opt = nullptr;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_variant = true) {
  cmd->add_option("--config", o.config, "experiment config JSON")
      ->required()
      ->envname("NJODE_CONFIG");
  if (with_variant)
    cmd->add_option("--variant", o.variant,
                    "one of N, N-OF, N-IS, N-OF-IS, N-IIS, N-OF-IIS")
        ->envname("NJODE_VARIANT");
  o.seed_opt = cmd->add_option("--seed", o.seed, "override dataset and training seeds")
                   ->envname("NJODE_SEED");
  cmd->add_option("--scale", o.scale, "shrink paths/widths/epochs by this factor")
      ->envname("NJODE_SCALE");
  cmd->add_option("--out", o.out, "output directory (default from config)")
      ->envname("NJODE_OUT");
}

ExperimentConfig resolve(const CommonOpts& o) {
  ExperimentConfig cfg = validate_config(read_config_file(o.config));
  if (!o.variant.empty()) override_variant(cfg, o.variant);
  if (o.seed_opt && o.seed_opt->count() > 0) {
    cfg.train.seed = o.seed;
    if (cfg.dataset_kind == "pendulum")
      cfg.pendulum.seed = o.seed;
    else
      cfg.gbm.seed = o.seed;
  }
  apply_scale(cfg, o.scale);
  if (!o.out.empty()) cfg.out_dir = o.out;
  return cfg;
}

void print_error(const char* kind, const std::string& message) {
  const json err{{"error", {{"kind", kind}, {"message", message}}}};
  std::fprintf(stderr, "%s\n", err.dump().c_str());
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"path-dependent neural jump ODE laboratory"};
  app.require_subcommand(1);

  CommonOpts gen_o, train_o, eval_o, export_o;
  std::string eval_ckpt, export_ckpt;
  int export_count = -1;

  CLI::App* gen = app.add_subcommand("generate", "sample a dataset and write it to disk");
  add_common(gen, gen_o, false);

  CLI::App* train = app.add_subcommand("train", "train a model variant on a dataset");
  add_common(train, train_o);

  CLI::App* eval = app.add_subcommand("evaluate", "compute metrics for a saved checkpoint");
  add_common(eval, eval_o);
  eval->add_option("--checkpoint", eval_ckpt, "checkpoint JSON")
      ->required()
      ->envname("NJODE_CHECKPOINT");

  CLI::App* exp = app.add_subcommand("export", "write per-path prediction CSVs");
  add_common(exp, export_o);
  exp->add_option("--checkpoint", export_ckpt, "checkpoint JSON")
      ->required()
      ->envname("NJODE_CHECKPOINT");
  exp->add_option("--count", export_count, "number of test paths to export")
      ->envname("NJODE_COUNT");

  std::string table;
  double rep_scale = 0.1;
  std::uint64_t rep_seed = 0;
  std::string rep_out = "runs";
  CLI::App* rep = app.add_subcommand("reproduce", "run a scaled variant sweep");
  rep->add_option("table", table, "table1 | table2")
      ->required()
      ->check(CLI::IsMember({"table1", "table2"}));
  rep->add_option("--scale", rep_scale, "sweep scale")->envname("NJODE_SCALE");
  rep->add_option("--seed", rep_seed, "sweep seed")->envname("NJODE_SEED");
  rep->add_option("--out", rep_out, "output directory")->envname("NJODE_OUT");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage", e.what());
    return 2;
  }

  try {
    json result;
    if (gen->parsed()) {
      result = run_generate(resolve(gen_o));
    } else if (train->parsed()) {
      result = run_train(resolve(train_o));
    } else if (eval->parsed()) {
      result = run_evaluate(resolve(eval_o), eval_ckpt);
    } else if (exp->parsed()) {
      ExperimentConfig cfg = resolve(export_o);
      if (export_count >= 0) cfg.export_count = export_count;
      result = run_export(cfg, export_ckpt);
    } else if (rep->parsed()) {
      result = table == "table1" ? reproduce_table1(rep_scale, rep_seed, rep_out)
                                 : reproduce_table2(rep_scale, rep_seed, rep_out);
    }
    std::printf("%s\n", result.dump(2).c_str());
    return 0;
  } catch (const std::exception& e) {
    const std::string kind = error_kind(e);
    print_error(kind.c_str(), e.what());
    return kind == "config" || kind == "usage" ? 2 : 1;
  }
}

}  // namespace njode
