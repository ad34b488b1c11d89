#include "njode/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "njode/errors.hpp"
#include "njode/hash.hpp"
#include "njode/loss.hpp"

namespace njode {

using nlohmann::json;
namespace fs = std::filesystem;

const std::vector<std::string>& variant_names() {
  static const std::vector<std::string> names{"N", "N-OF", "N-IS", "N-OF-IS", "N-IIS", "N-OF-IIS"};
  return names;
}

VariantSpec variant_spec(const std::string& name) {
  VariantSpec spec;
  if (name == "N") {
    spec.schedule.kind = ScheduleSpec::Kind::kAlways;
  } else if (name == "N-OF") {
    spec.output_feedback = true;
    spec.schedule.kind = ScheduleSpec::Kind::kAlways;
  } else if (name == "N-IS") {
    spec.schedule.kind = ScheduleSpec::Kind::kNever;
    spec.val_initial_only = true;
  } else if (name == "N-OF-IS") {
    spec.output_feedback = true;
    spec.schedule.kind = ScheduleSpec::Kind::kNever;
    spec.val_initial_only = true;
  } else if (name == "N-IIS") {
    spec.schedule.kind = ScheduleSpec::Kind::kLinearDecay;
    spec.schedule.e0 = 100.0;
    spec.val_initial_only = true;
  } else if (name == "N-OF-IIS") {
    spec.output_feedback = true;
    spec.schedule.kind = ScheduleSpec::Kind::kLinearDecay;
    spec.schedule.e0 = 100.0;
    spec.val_initial_only = true;
  } else {
    throw ConfigError("unknown variant '" + name + "'");
  }
  return spec;
}

namespace {

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& ctx) {
  std::string bad;
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed)
      if (it.key() == a) {
        ok = true;
        break;
      }
    if (!ok) bad += (bad.empty() ? "" : ", ") + it.key();
  }
  if (!bad.empty()) throw ConfigError("unknown key(s) in " + ctx + ": " + bad);
}

template <class T>
T get_as(const json& obj, const char* key, const std::string& ctx) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(ctx + "." + key + ": " + e.what());
  }
}

template <class T>
T get_or(const json& obj, const char* key, const std::string& ctx, T def) {
  if (!obj.contains(key)) return def;
  return get_as<T>(obj, key, ctx);
}

json section(const json& doc, const char* name) {
  if (!doc.contains(name)) return json::object();
  if (!doc.at(name).is_object())
    throw ConfigError(std::string(name) + " section must be an object");
  return doc.at(name);
}

void apply_variant(ExperimentConfig& cfg, const std::string& name) {
  const VariantSpec spec = variant_spec(name);
  cfg.variant = name;
  cfg.model.use_output_feedback = spec.output_feedback;
  cfg.train.schedule = spec.schedule;
  cfg.train.val_initial_only = spec.val_initial_only;
}

EvalGating parse_gating(const std::string& name) {
  if (name == "all") return EvalGating::kAll;
  if (name == "initial_only") return EvalGating::kInitialOnly;
  throw ConfigError("eval.gating must be 'all' or 'initial_only', got '" + name + "'");
}

}  // namespace

ExperimentConfig validate_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config document must be a JSON object");
  check_keys(doc, {"schema", "dataset", "model", "train", "eval", "out"}, "config");
  if (doc.contains("schema") && doc.at("schema") != "njode-config-v1")
    throw ConfigError("config: unsupported schema " + doc.at("schema").dump());
  if (!doc.contains("dataset")) throw ConfigError("config: dataset section is required");

  ExperimentConfig cfg;
  const json ds = section(doc, "dataset");
  cfg.dataset_kind = get_as<std::string>(ds, "kind", "dataset");

  if (cfg.dataset_kind == "pendulum") {
    check_keys(ds,
               {"kind", "n_paths", "obs_prob", "step", "horizon", "alpha_mean", "alpha_std",
                "endpoint_observable", "val_fraction", "test_fraction", "seed", "m1", "m2",
                "l1", "l2", "g"},
               "dataset");
    PendulumDatasetConfig& p = cfg.pendulum;
    p.n_paths = get_or(ds, "n_paths", "dataset", p.n_paths);
    p.obs_prob = get_or(ds, "obs_prob", "dataset", p.obs_prob);
    p.step = get_or(ds, "step", "dataset", p.step);
    p.horizon = get_or(ds, "horizon", "dataset", p.horizon);
    p.alpha_mean = get_or(ds, "alpha_mean", "dataset", p.alpha_mean);
    p.alpha_std = get_or(ds, "alpha_std", "dataset", p.alpha_std);
    p.endpoint_observable = get_or(ds, "endpoint_observable", "dataset", p.endpoint_observable);
    p.split.val_fraction = get_or(ds, "val_fraction", "dataset", p.split.val_fraction);
    p.split.test_fraction = get_or(ds, "test_fraction", "dataset", p.split.test_fraction);
    p.seed = get_or(ds, "seed", "dataset", p.seed);
    p.constants.m1 = get_or(ds, "m1", "dataset", p.constants.m1);
    p.constants.m2 = get_or(ds, "m2", "dataset", p.constants.m2);
    p.constants.l1 = get_or(ds, "l1", "dataset", p.constants.l1);
    p.constants.l2 = get_or(ds, "l2", "dataset", p.constants.l2);
    p.constants.g = get_or(ds, "g", "dataset", p.constants.g);
    cfg.model.d = 4;
    cfg.model.d_H = 400;
    cfg.model.hidden = {200};
    cfg.model.signature_level = 0;
  } else if (cfg.dataset_kind == "gbm") {
    check_keys(ds,
               {"kind", "variant", "n_paths", "dt", "horizon", "x0", "sigma", "scheme",
                "endpoint_observable", "val_fraction", "test_fraction", "seed"},
               "dataset");
    GbmDatasetConfig& g = cfg.gbm;
    g.variant = get_or<std::string>(ds, "variant", "dataset", g.variant);
    gbm_obs_prob(g.variant);  // rejects unknown variants
    g.n_paths = get_or(ds, "n_paths", "dataset", g.n_paths);
    g.dt = get_or(ds, "dt", "dataset", g.dt);
    g.horizon = get_or(ds, "horizon", "dataset", g.horizon);
    g.x0 = get_or(ds, "x0", "dataset", g.x0);
    g.sigma = get_or(ds, "sigma", "dataset", g.sigma);
    g.scheme = get_or<std::string>(ds, "scheme", "dataset", g.scheme);
    if (g.scheme != "exact" && g.scheme != "euler")
      throw ConfigError("dataset.scheme must be 'exact' or 'euler', got '" + g.scheme + "'");
    g.endpoint_observable = get_or(ds, "endpoint_observable", "dataset", g.endpoint_observable);
    g.split.val_fraction = get_or(ds, "val_fraction", "dataset", g.split.val_fraction);
    g.split.test_fraction = get_or(ds, "test_fraction", "dataset", g.split.test_fraction);
    g.seed = get_or(ds, "seed", "dataset", g.seed);
    cfg.model.d = 1;
    cfg.model.d_H = 100;
    cfg.model.hidden = {100};
    cfg.model.signature_level = 3;
  } else {
    throw ConfigError("dataset.kind must be 'pendulum' or 'gbm', got '" + cfg.dataset_kind + "'");
  }

  const json mj = section(doc, "model");
  check_keys(mj,
             {"d_H", "hidden", "use_output_feedback", "use_recurrent_jump", "signature_level",
              "ode_substeps"},
             "model");
  cfg.model.d_H = get_or(mj, "d_H", "model", cfg.model.d_H);
  cfg.model.hidden = get_or(mj, "hidden", "model", cfg.model.hidden);
  cfg.model.use_recurrent_jump =
      get_or(mj, "use_recurrent_jump", "model", cfg.model.use_recurrent_jump);
  cfg.model.signature_level = get_or(mj, "signature_level", "model", cfg.model.signature_level);
  cfg.model.ode_substeps = get_or(mj, "ode_substeps", "model", cfg.model.ode_substeps);
  cfg.output_feedback_explicit = mj.contains("use_output_feedback");
  if (cfg.output_feedback_explicit)
    cfg.model.use_output_feedback = get_as<bool>(mj, "use_output_feedback", "model");

  const json tj = section(doc, "train");
  check_keys(tj,
             {"variant", "epochs", "batch_size", "seed", "patience", "lr", "beta1", "beta2",
              "eps", "schedule", "val_gating"},
             "train");
  cfg.train.epochs = get_or(tj, "epochs", "train", 200);
  cfg.train.batch_size = get_or(tj, "batch_size", "train", 100);
  cfg.train.seed = get_or(tj, "seed", "train", cfg.train.seed);
  cfg.train.patience = get_or(tj, "patience", "train", 0);
  cfg.train.adam.lr = get_or(tj, "lr", "train", cfg.train.adam.lr);
  cfg.train.adam.beta1 = get_or(tj, "beta1", "train", cfg.train.adam.beta1);
  cfg.train.adam.beta2 = get_or(tj, "beta2", "train", cfg.train.adam.beta2);
  cfg.train.adam.eps = get_or(tj, "eps", "train", cfg.train.adam.eps);
  cfg.schedule_explicit = tj.contains("schedule") || tj.contains("val_gating");

  if (tj.contains("variant")) {
    if (cfg.schedule_explicit)
      throw ConfigError("train.variant conflicts with explicit train.schedule/val_gating");
    if (cfg.output_feedback_explicit)
      throw ConfigError("train.variant conflicts with explicit model.use_output_feedback");
    apply_variant(cfg, get_as<std::string>(tj, "variant", "train"));
  } else {
    if (tj.contains("schedule")) {
      const json sj = tj.at("schedule");
      if (!sj.is_object()) throw ConfigError("train.schedule must be an object");
      check_keys(sj, {"kind", "p", "e0", "lambda"}, "train.schedule");
      cfg.train.schedule.kind =
          schedule_kind_from_name(get_as<std::string>(sj, "kind", "train.schedule"));
      cfg.train.schedule.p = get_or(sj, "p", "train.schedule", cfg.train.schedule.p);
      cfg.train.schedule.e0 = get_or(sj, "e0", "train.schedule", cfg.train.schedule.e0);
      cfg.train.schedule.lambda =
          get_or(sj, "lambda", "train.schedule", cfg.train.schedule.lambda);
    }
    if (tj.contains("val_gating")) {
      const std::string vg = get_as<std::string>(tj, "val_gating", "train");
      if (vg != "all" && vg != "initial_only")
        throw ConfigError("train.val_gating must be 'all' or 'initial_only'");
      cfg.train.val_initial_only = vg == "initial_only";
    }
  }

  const json ej = section(doc, "eval");
  check_keys(ej, {"gating", "long_term_s", "export_count", "track_metric"}, "eval");
  cfg.eval_gating = get_or<std::string>(ej, "gating", "eval", "initial_only");
  parse_gating(cfg.eval_gating);
  cfg.track_metric = get_or(ej, "track_metric", "eval", cfg.dataset_kind == "gbm");
  cfg.long_term_s = get_or(ej, "long_term_s", "eval", cfg.long_term_s);
  cfg.export_count = get_or(ej, "export_count", "eval", cfg.export_count);
  if (cfg.track_metric && cfg.dataset_kind != "gbm")
    throw ConfigError("eval.track_metric requires a dataset with a closed-form reference");

  if (doc.contains("out")) {
    if (!doc.at("out").is_string()) throw ConfigError("out must be a string");
    cfg.out_dir = doc.at("out").get<std::string>();
  }
  return cfg;
}

void override_variant(ExperimentConfig& cfg, const std::string& variant) {
  if (cfg.schedule_explicit)
    throw ConfigError("--variant conflicts with explicit train.schedule/val_gating in config");
  if (cfg.output_feedback_explicit)
    throw ConfigError("--variant conflicts with explicit model.use_output_feedback in config");
  apply_variant(cfg, variant);
}

void apply_scale(ExperimentConfig& cfg, double scale) {
  if (!(scale > 0.0)) throw ConfigError("--scale must be positive");
  if (scale == 1.0) return;
  const auto scaled = [scale](int v, int floor_v) {
    return std::max(floor_v, static_cast<int>(std::lround(v * scale)));
  };
  if (cfg.dataset_kind == "pendulum")
    cfg.pendulum.n_paths = scaled(cfg.pendulum.n_paths, 50);
  else
    cfg.gbm.n_paths = scaled(cfg.gbm.n_paths, 50);
  cfg.model.d_H = scaled(cfg.model.d_H, 10);
  for (int& h : cfg.model.hidden) h = scaled(h, 10);
  cfg.train.epochs = scaled(cfg.train.epochs, 5);
  cfg.train.batch_size = scaled(cfg.train.batch_size, 10);
  if (cfg.train.schedule.kind == ScheduleSpec::Kind::kLinearDecay)
    cfg.train.schedule.e0 = std::max(5.0, cfg.train.schedule.e0 * scale);
}

json normalize_config(const ExperimentConfig& cfg) {
  json ds;
  if (cfg.dataset_kind == "pendulum") {
    const PendulumDatasetConfig& p = cfg.pendulum;
    ds = json{{"kind", "pendulum"},
              {"n_paths", p.n_paths},
              {"obs_prob", p.obs_prob},
              {"step", p.step},
              {"horizon", p.horizon},
              {"alpha_mean", p.alpha_mean},
              {"alpha_std", p.alpha_std},
              {"endpoint_observable", p.endpoint_observable},
              {"val_fraction", p.split.val_fraction},
              {"test_fraction", p.split.test_fraction},
              {"seed", p.seed},
              {"m1", p.constants.m1},
              {"m2", p.constants.m2},
              {"l1", p.constants.l1},
              {"l2", p.constants.l2},
              {"g", p.constants.g}};
  } else {
    const GbmDatasetConfig& g = cfg.gbm;
    ds = json{{"kind", "gbm"},
              {"variant", g.variant},
              {"n_paths", g.n_paths},
              {"dt", g.dt},
              {"horizon", g.horizon},
              {"x0", g.x0},
              {"sigma", g.sigma},
              {"scheme", g.scheme},
              {"endpoint_observable", g.endpoint_observable},
              {"val_fraction", g.split.val_fraction},
              {"test_fraction", g.split.test_fraction},
              {"seed", g.seed}};
  }

  json mj{{"d_H", cfg.model.d_H},
          {"hidden", cfg.model.hidden},
          {"use_recurrent_jump", cfg.model.use_recurrent_jump},
          {"signature_level", cfg.model.signature_level},
          {"ode_substeps", cfg.model.ode_substeps}};

  json tj{{"epochs", cfg.train.epochs},
          {"batch_size", cfg.train.batch_size},
          {"seed", cfg.train.seed},
          {"patience", cfg.train.patience},
          {"lr", cfg.train.adam.lr},
          {"beta1", cfg.train.adam.beta1},
          {"beta2", cfg.train.adam.beta2},
          {"eps", cfg.train.adam.eps}};
  if (!cfg.variant.empty()) {
    tj["variant"] = cfg.variant;
  } else {
    mj["use_output_feedback"] = cfg.model.use_output_feedback;
    json sj{{"kind", schedule_kind_name(cfg.train.schedule.kind)}};
    if (cfg.train.schedule.kind == ScheduleSpec::Kind::kFixed) sj["p"] = cfg.train.schedule.p;
    if (cfg.train.schedule.kind == ScheduleSpec::Kind::kLinearDecay)
      sj["e0"] = cfg.train.schedule.e0;
    if (cfg.train.schedule.kind == ScheduleSpec::Kind::kExponentialGap)
      sj["lambda"] = cfg.train.schedule.lambda;
    tj["schedule"] = sj;
    tj["val_gating"] = cfg.train.val_initial_only ? "initial_only" : "all";
  }

  json ej{{"gating", cfg.eval_gating},
          {"track_metric", cfg.track_metric},
          {"long_term_s", cfg.long_term_s},
          {"export_count", cfg.export_count}};

  return json{{"schema", "njode-config-v1"},
              {"dataset", ds},
              {"model", mj},
              {"train", tj},
              {"eval", ej},
              {"out", cfg.out_dir}};
}

std::string config_hash(const json& normalized) {
  const std::uint64_t h = fnv1a(normalized.dump());
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

DatasetBundle ensure_dataset(const ExperimentConfig& cfg, fs::path* dir_out) {
  const json ds = normalize_config(cfg).at("dataset");
  const fs::path dir =
      fs::path(cfg.out_dir) / "datasets" / (cfg.dataset_kind + "-" + config_hash(ds));
  if (dir_out) *dir_out = dir;
  if (fs::exists(dir / "meta.json")) return load_dataset(dir);
  DatasetBundle bundle = cfg.dataset_kind == "pendulum" ? sample_pendulum_dataset(cfg.pendulum)
                                                        : sample_gbm_dataset(cfg.gbm);
  save_dataset(bundle, dir);
  return bundle;
}

namespace {

fs::path make_run_dir(const ExperimentConfig& cfg, const json& normalized) {
  const fs::path dir = fs::path(cfg.out_dir) /
                       ("run-" + config_hash(normalized) + "-s" + std::to_string(cfg.train.seed));
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create run dir " + dir.string() + ": " + ec.message());
  return dir;
}

void write_text(const fs::path& file, const std::string& text) {
  std::ofstream out(file);
  if (!out) throw IoError("cannot write " + file.string());
  out << text;
  if (!out) throw IoError("write failure for " + file.string());
}

json report_to_json(const TrainReport& rep) {
  return json{{"p_used", rep.p_used},
              {"train_loss", rep.train_loss},
              {"val_loss", rep.val_loss},
              {"metric", rep.metric},
              {"seconds", rep.seconds},
              {"theta_fnv", rep.theta_fnv},
              {"best_epoch", rep.best_epoch},
              {"best_val_loss", rep.best_val_loss},
              {"epochs_run", rep.epochs_run}};
}

std::string report_to_csv(const TrainReport& rep) {
  std::ostringstream out;
  out << "epoch,p,train_loss,val_loss,metric,seconds\n";
  char buf[32];
  for (int e = 0; e < rep.epochs_run; ++e) {
    out << e;
    for (double v : {rep.p_used[static_cast<std::size_t>(e)],
                     rep.train_loss[static_cast<std::size_t>(e)],
                     rep.val_loss[static_cast<std::size_t>(e)],
                     rep.metric[static_cast<std::size_t>(e)],
                     rep.seconds[static_cast<std::size_t>(e)]}) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      out << ',' << buf;
    }
    out << '\n';
  }
  return out.str();
}

double min_finite(const std::vector<double>& xs) {
  double best = std::numeric_limits<double>::quiet_NaN();
  for (double x : xs)
    if (std::isfinite(x) && (std::isnan(best) || x < best)) best = x;
  return best;
}

// Relative RMSE of the s-cutoff prediction against the reference over the
// whole grid, averaged over up to max_paths test paths. For gbm the
// reference is the closed-form conditional expectation; for deterministic
// datasets it is the true path.
double long_term_rel_rmse(const ad::ParamStore& store, const ModelParams& mp,
                          const DatasetBundle& data, const std::vector<int>& indices, double s,
                          int max_paths) {
  if (indices.empty()) throw UsageError("long_term_rel_rmse: empty index list");
  const bool gbm = data.meta.value("kind", "") == "gbm";
  GbmDrift drift;
  if (gbm) drift = gbm_variant_drift(data.meta.at("params").at("variant").get<std::string>());

  const int n = std::min<int>(max_paths, static_cast<int>(indices.size()));
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const int idx = indices[static_cast<std::size_t>(i)];
    const PathSample& path = data.paths[static_cast<std::size_t>(idx)];
    const ObservationSet& obs = data.observations[static_cast<std::size_t>(idx)];
    const PredictionSeries pred = long_term_predict(store, mp, path, obs, s);

    ObservationSet gated = obs;
    for (int k = 0; k < gated.count(); ++k)
      gated.input_flags[static_cast<std::size_t>(k)] =
          path.times[static_cast<std::size_t>(gated.obs_indices[k])] <= s ? 1 : 0;
    std::vector<double> ref;
    if (gbm) {
      ref = closed_form_reference_grid(drift, path, gated);
    } else {
      ref = path.values;
    }
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < ref.size(); ++k) {
      const double e = pred.grid_values[k] - ref[k];
      num += e * e;
      den += ref[k] * ref[k];
    }
    acc += den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
  }
  return acc / static_cast<double>(n);
}

json compute_metrics(const ExperimentConfig& cfg, const ad::ParamStore& store,
                     const ModelParams& mp, const DatasetBundle& data,
                     const TrainReport* rep) {
  json metrics;
  if (cfg.dataset_kind == "pendulum") {
    metrics["path_mse_test"] = path_mse(store, mp, data, data.test_idx);
  } else {
    metrics["eval_metric_test"] =
        eval_metric(store, mp, data, data.test_idx, parse_gating(cfg.eval_gating));
    if (rep) metrics["eval_metric_min_epoch"] = min_finite(rep->metric);
  }
  if (!cfg.long_term_s.empty()) {
    json lt = json::object();
    for (double s : cfg.long_term_s) {
      char key[32];
      std::snprintf(key, sizeof(key), "%g", s);
      lt[key] = long_term_rel_rmse(store, mp, data, data.test_idx, s, 20);
    }
    metrics["long_term_rel_rmse"] = lt;
  }
  return metrics;
}

}  // namespace

json run_generate(const ExperimentConfig& cfg) {
  fs::path dir;
  const DatasetBundle bundle = ensure_dataset(cfg, &dir);
  return json{{"dataset_dir", dir.string()},
              {"n_paths", bundle.n_paths()},
              {"d", bundle.d},
              {"grid_len", bundle.paths.empty() ? 0 : bundle.paths.front().n_times()},
              {"train_paths", bundle.train_idx.size()},
              {"val_paths", bundle.val_idx.size()},
              {"test_paths", bundle.test_idx.size()}};
}

json run_train(const ExperimentConfig& cfg) {
  const json normalized = normalize_config(cfg);
  const fs::path run_dir = make_run_dir(cfg, normalized);
  write_text(run_dir / "config.json", normalized.dump(2) + "\n");

  fs::path ds_dir;
  const DatasetBundle bundle = ensure_dataset(cfg, &ds_dir);

  EpochMetricHook hook;
  if (cfg.track_metric && cfg.dataset_kind == "gbm") {
    const EvalGating gating = parse_gating(cfg.eval_gating);
    hook = [&bundle, gating](const ad::ParamStore& store, const ModelParams& mp, int) {
      return eval_metric(store, mp, bundle, bundle.test_idx, gating);
    };
  }
  const TrainResult result = train_model(bundle, cfg.model, cfg.train, hook);

  save_checkpoint(run_dir / "checkpoint.json", result.store, result.model);
  write_text(run_dir / "report.json", report_to_json(result.report).dump(2) + "\n");
  write_text(run_dir / "report.csv", report_to_csv(result.report));

  const json metrics = compute_metrics(cfg, result.store, result.model, bundle, &result.report);
  write_text(run_dir / "metrics.json", metrics.dump(2) + "\n");

  double seconds_total = 0.0;
  for (double s : result.report.seconds) seconds_total += s;
  return json{{"run_dir", run_dir.string()},
              {"dataset_dir", ds_dir.string()},
              {"variant", cfg.variant},
              {"best_epoch", result.report.best_epoch},
              {"best_val_loss", result.report.best_val_loss},
              {"epochs_run", result.report.epochs_run},
              {"metrics", metrics},
              {"report", report_to_json(result.report)},
              {"seconds_total", seconds_total}};
}

json run_evaluate(const ExperimentConfig& cfg, const fs::path& checkpoint) {
  const Checkpoint ckpt = load_checkpoint(checkpoint);
  const DatasetBundle bundle = ensure_dataset(cfg);
  if (ckpt.model.config.d != bundle.d)
    throw ConfigError("checkpoint dimension does not match dataset");
  const json metrics = compute_metrics(cfg, ckpt.store, ckpt.model, bundle, nullptr);

  const json normalized = normalize_config(cfg);
  const fs::path run_dir = make_run_dir(cfg, normalized);
  write_text(run_dir / "metrics.json", metrics.dump(2) + "\n");
  return json{{"run_dir", run_dir.string()},
              {"checkpoint", checkpoint.string()},
              {"metrics", metrics}};
}

json run_export(const ExperimentConfig& cfg, const fs::path& checkpoint) {
  const Checkpoint ckpt = load_checkpoint(checkpoint);
  const DatasetBundle bundle = ensure_dataset(cfg);
  if (ckpt.model.config.d != bundle.d)
    throw ConfigError("checkpoint dimension does not match dataset");

  const json normalized = normalize_config(cfg);
  const fs::path run_dir = make_run_dir(cfg, normalized);
  const fs::path series_dir = run_dir / "series";
  std::error_code ec;
  fs::create_directories(series_dir, ec);
  if (ec) throw IoError("cannot create " + series_dir.string() + ": " + ec.message());

  const EvalGating gating = parse_gating(cfg.eval_gating);
  const bool gbm = cfg.dataset_kind == "gbm";
  GbmDrift drift;
  if (gbm) drift = gbm_variant_drift(bundle.meta.at("params").at("variant").get<std::string>());

  json files = json::array();
  const int n = std::min<int>(cfg.export_count, static_cast<int>(bundle.test_idx.size()));
  for (int i = 0; i < n; ++i) {
    const int idx = bundle.test_idx[static_cast<std::size_t>(i)];
    const PathSample& path = bundle.paths[static_cast<std::size_t>(idx)];
    ObservationSet obs = bundle.observations[static_cast<std::size_t>(idx)];
    std::fill(obs.input_flags.begin(), obs.input_flags.end(),
              gating == EvalGating::kAll ? 1 : 0);
    obs.input_flags[0] = 1;
    const PredictionSeries pred = forward_path(ckpt.store, ckpt.model, path, obs);
    std::vector<double> ref;
    if (gbm) ref = closed_form_reference_grid(drift, path, obs);
    const fs::path file = series_dir / ("series_" + std::to_string(idx) + ".csv");
    export_series(file, path, obs, pred, gbm ? &ref : nullptr);
    files.push_back(file.string());
  }
  return json{{"run_dir", run_dir.string()}, {"series", files}};
}

namespace {

ExperimentConfig base_table_config(const std::string& kind, const std::string& gbm_variant,
                                   const std::string& variant, double scale, std::uint64_t seed,
                                   const fs::path& out, bool long_tail) {
  json doc{{"dataset", json{{"kind", kind}, {"seed", seed}}},
           {"out", out.string()}};
  if (kind == "gbm") doc["dataset"]["variant"] = gbm_variant;
  ExperimentConfig cfg = validate_config(doc);
  cfg.train.seed = seed;
  override_variant(cfg, variant);
  apply_scale(cfg, scale);  // after the variant so the decay horizon scales too
  if (long_tail) {
    // The pendulum trains slowly at small scale; give the sweep a longer
    // tail and keep the decay horizon at half the run as at full scale.
    cfg.train.epochs *= 2;
    if (cfg.train.schedule.kind == ScheduleSpec::Kind::kLinearDecay)
      cfg.train.schedule.e0 = 0.5 * cfg.train.epochs;
  }
  return cfg;
}

json strip_timing(json j) {
  j.erase("seconds_total");
  if (j.contains("report")) j["report"].erase("seconds");
  return j;
}

}  // namespace

json reproduce_table1(double scale, std::uint64_t seed, const fs::path& out) {
  const fs::path table_dir = out / "table1";
  json rows = json::array();
  std::ostringstream csv;
  csv << "variant,path_mse\n";
  for (const std::string& name : variant_names()) {
    ExperimentConfig cfg = base_table_config("pendulum", "", name, scale, seed, table_dir, true);
    const json summary = run_train(cfg);
    const double mse = summary.at("metrics").at("path_mse_test").get<double>();
    std::fprintf(stderr, "[table1] %-8s path_mse=%.6g\n", name.c_str(), mse);
    csv << name << ',' << json(mse).dump() << '\n';
    json row = strip_timing(summary);
    row["variant"] = name;
    row["path_mse"] = mse;
    rows.push_back(row);
  }
  std::error_code ec;
  fs::create_directories(table_dir, ec);
  json result{{"table", "table1"}, {"scale", scale}, {"seed", seed}, {"rows", rows}};
  write_text(table_dir / "table1.csv", csv.str());
  write_text(table_dir / "table1.json", result.dump(2) + "\n");
  return result;
}

json reproduce_table2(double scale, std::uint64_t seed, const fs::path& out) {
  const fs::path table_dir = out / "table2";
  json rows = json::array();
  std::ostringstream csv;
  csv << "dataset,variant,eval_metric_min,eval_metric_best,long_term_rel_rmse_s0\n";
  for (const std::string& ds : {std::string("BS-Base"), std::string("BS-HighFreq"),
                                std::string("BS-TimeDep")}) {
    for (const std::string& name : {std::string("N"), std::string("N-OF-IIS")}) {
      ExperimentConfig cfg = base_table_config("gbm", ds, name, scale, seed, table_dir, false);
      cfg.track_metric = true;
      cfg.long_term_s = {0.0};
      const json summary = run_train(cfg);
      const json& metrics = summary.at("metrics");
      const double m_min = metrics.at("eval_metric_min_epoch").get<double>();
      const double m_best = metrics.at("eval_metric_test").get<double>();
      const double rel = metrics.at("long_term_rel_rmse").at("0").get<double>();
      std::fprintf(stderr, "[table2] %-11s %-8s metric_min=%.6g rel_rmse=%.6g\n", ds.c_str(),
                   name.c_str(), m_min, rel);
      csv << ds << ',' << name << ',' << json(m_min).dump() << ',' << json(m_best).dump() << ','
          << json(rel).dump() << '\n';
      json row = strip_timing(summary);
      row["dataset"] = ds;
      row["variant"] = name;
      row["eval_metric_min"] = m_min;
      row["eval_metric_best"] = m_best;
      row["long_term_rel_rmse_s0"] = rel;
      rows.push_back(row);
    }
  }
  std::error_code ec;
  fs::create_directories(table_dir, ec);
  json result{{"table", "table2"}, {"scale", scale}, {"seed", seed}, {"rows", rows}};
  write_text(table_dir / "table2.csv", csv.str());
  write_text(table_dir / "table2.json", result.dump(2) + "\n");
  return result;
}

}  // namespace njode
