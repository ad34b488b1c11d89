#include "njode/datagen.hpp"

#include <cmath>
#include <fstream>

#include "njode/errors.hpp"
#include "njode/rng.hpp"

namespace njode {

using nlohmann::json;

double gbm_obs_prob(const std::string& variant) {
  if (variant == "BS-Base" || variant == "BS-TimeDep") return 0.1;
  if (variant == "BS-HighFreq") return 0.4;
  throw ConfigError("unknown gbm variant: " + variant);
}

GbmDrift gbm_variant_drift(const std::string& variant) {
  GbmDrift drift;
  if (variant == "BS-Base" || variant == "BS-HighFreq") {
    drift.kind = GbmDrift::Kind::kConstant;
    drift.mu = 2.0;
  } else if (variant == "BS-TimeDep") {
    drift.kind = GbmDrift::Kind::kSinPlusOne;
  } else {
    throw ConfigError("unknown gbm variant: " + variant);
  }
  return drift;
}

ObservationSet sample_observations(int grid_len, double prob, std::uint64_t seed, int d,
                                   bool include_last) {
  if (grid_len < 2) throw UsageError("sample_observations: grid_len must be >= 2");
  if (!(prob > 0.0 && prob <= 1.0))
    throw UsageError("sample_observations: prob must be in (0,1]");
  if (d < 1) throw UsageError("sample_observations: d must be >= 1");

  Rng rng(seed);
  ObservationSet obs;
  obs.obs_indices.push_back(0);
  const int last = include_last ? grid_len - 1 : grid_len - 2;
  for (int k = 1; k <= last; ++k)
    if (rng.uniform() < prob) obs.obs_indices.push_back(k);
  obs.masks.assign(obs.obs_indices.size() * static_cast<std::size_t>(d), 1);
  obs.input_flags.assign(obs.obs_indices.size(), 1);
  return obs;
}

void split_indices(int n, const SplitSpec& split, std::vector<int>& train,
                   std::vector<int>& val, std::vector<int>& test) {
  if (n < 1) throw UsageError("split_indices: need at least one path");
  const int n_val = static_cast<int>(std::lround(split.val_fraction * n));
  const int n_test = static_cast<int>(std::lround(split.test_fraction * n));
  const int n_train = n - n_val - n_test;
  if (n_train < 1) throw ConfigError("split_indices: split leaves no training paths");
  train.clear();
  val.clear();
  test.clear();
  for (int i = 0; i < n_train; ++i) train.push_back(i);
  for (int i = n_train; i < n_train + n_val; ++i) val.push_back(i);
  for (int i = n_train + n_val; i < n; ++i) test.push_back(i);
}

DatasetBundle sample_pendulum_dataset(const PendulumDatasetConfig& cfg) {
  if (cfg.n_paths < 1) throw ConfigError("pendulum dataset: n_paths must be positive");
  if (!(cfg.obs_prob > 0.0 && cfg.obs_prob <= 1.0))
    throw ConfigError("pendulum dataset: obs_prob must be in (0,1]");
  const int n_steps = static_cast<int>(std::lround(cfg.horizon / cfg.step));
  if (n_steps < 1) throw ConfigError("pendulum dataset: horizon shorter than one step");

  DatasetBundle bundle;
  bundle.d = 4;
  bundle.paths.reserve(static_cast<std::size_t>(cfg.n_paths));
  bundle.observations.reserve(static_cast<std::size_t>(cfg.n_paths));

  const PendulumConstants c = cfg.constants;
  const RhsFn rhs = [&c](double, const std::vector<double>& x) { return pendulum_rhs(x, c); };
  for (int i = 0; i < cfg.n_paths; ++i) {
    Rng init_rng(derive_seed(cfg.seed, stream::kInitial, static_cast<std::uint64_t>(i)));
    const double alpha = init_rng.normal(cfg.alpha_mean, cfg.alpha_std);
    bundle.paths.push_back(rk4_integrate(rhs, {alpha, alpha, 0.0, 0.0}, cfg.step, n_steps));
    bundle.observations.push_back(sample_observations(
        n_steps + 1, cfg.obs_prob,
        derive_seed(cfg.seed, stream::kObs, static_cast<std::uint64_t>(i)), 4,
        cfg.endpoint_observable));
  }
  split_indices(cfg.n_paths, cfg.split, bundle.train_idx, bundle.val_idx, bundle.test_idx);

  bundle.meta = json{
      {"kind", "pendulum"},
      {"seed", cfg.seed},
      {"params",
       json{{"n_paths", cfg.n_paths},
            {"obs_prob", cfg.obs_prob},
            {"step", cfg.step},
            {"horizon", cfg.horizon},
            {"alpha_mean", cfg.alpha_mean},
            {"alpha_std", cfg.alpha_std},
            {"endpoint_observable", cfg.endpoint_observable},
            {"val_fraction", cfg.split.val_fraction},
            {"test_fraction", cfg.split.test_fraction},
            {"m1", c.m1},
            {"m2", c.m2},
            {"l1", c.l1},
            {"l2", c.l2},
            {"g", c.g}}}};
  return bundle;
}

DatasetBundle sample_gbm_dataset(const GbmDatasetConfig& cfg) {
  if (cfg.n_paths < 1) throw ConfigError("gbm dataset: n_paths must be positive");
  if (cfg.scheme != "exact" && cfg.scheme != "euler")
    throw ConfigError("gbm dataset: scheme must be 'exact' or 'euler'");
  const double obs_prob = gbm_obs_prob(cfg.variant);
  const GbmDrift drift = gbm_variant_drift(cfg.variant);
  const int n_steps = static_cast<int>(std::lround(cfg.horizon / cfg.dt));
  if (n_steps < 1) throw ConfigError("gbm dataset: horizon shorter than one step");

  DatasetBundle bundle;
  bundle.d = 1;
  bundle.paths.reserve(static_cast<std::size_t>(cfg.n_paths));
  bundle.observations.reserve(static_cast<std::size_t>(cfg.n_paths));
  const bool exact = cfg.scheme == "exact";
  for (int i = 0; i < cfg.n_paths; ++i) {
    Rng noise_rng(derive_seed(cfg.seed, stream::kNoise, static_cast<std::uint64_t>(i)));
    bundle.paths.push_back(exact
                               ? gbm_exact_path(cfg.x0, drift, cfg.sigma, cfg.dt, n_steps, noise_rng)
                               : gbm_euler_path(cfg.x0, drift, cfg.sigma, cfg.dt, n_steps, noise_rng));
    bundle.observations.push_back(sample_observations(
        n_steps + 1, obs_prob, derive_seed(cfg.seed, stream::kObs, static_cast<std::uint64_t>(i)),
        1, cfg.endpoint_observable));
  }
  split_indices(cfg.n_paths, cfg.split, bundle.train_idx, bundle.val_idx, bundle.test_idx);

  bundle.meta = json{{"kind", "gbm"},
                     {"seed", cfg.seed},
                     {"params",
                      json{{"variant", cfg.variant},
                           {"n_paths", cfg.n_paths},
                           {"dt", cfg.dt},
                           {"horizon", cfg.horizon},
                           {"x0", cfg.x0},
                           {"sigma", cfg.sigma},
                           {"scheme", cfg.scheme},
                           {"obs_prob", obs_prob},
                           {"endpoint_observable", cfg.endpoint_observable},
                           {"val_fraction", cfg.split.val_fraction},
                           {"test_fraction", cfg.split.test_fraction}}}};
  return bundle;
}

void save_dataset(const DatasetBundle& bundle, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("save_dataset: cannot create " + dir.string() + ": " + ec.message());

  json meta{{"schema", "njode-dataset-v1"},
            {"d", bundle.d},
            {"n_paths", bundle.n_paths()},
            {"meta", bundle.meta},
            {"split", json{{"train", bundle.train_idx},
                           {"val", bundle.val_idx},
                           {"test", bundle.test_idx}}}};
  {
    std::ofstream out(dir / "meta.json");
    if (!out) throw IoError("save_dataset: cannot write meta.json in " + dir.string());
    out << meta.dump(2) << "\n";
  }
  std::ofstream out(dir / "paths.jsonl");
  if (!out) throw IoError("save_dataset: cannot write paths.jsonl in " + dir.string());
  for (int i = 0; i < bundle.n_paths(); ++i) {
    const PathSample& p = bundle.paths[static_cast<std::size_t>(i)];
    const ObservationSet& o = bundle.observations[static_cast<std::size_t>(i)];
    json rec{{"times", p.times},
             {"values", p.values},
             {"obs_indices", o.obs_indices},
             {"masks", o.masks}};
    out << rec.dump() << "\n";
  }
  if (!out) throw IoError("save_dataset: write failure in " + dir.string());
}

DatasetBundle load_dataset(const std::filesystem::path& dir) {
  std::ifstream meta_in(dir / "meta.json");
  if (!meta_in) throw IoError("load_dataset: missing meta.json in " + dir.string());
  json meta;
  try {
    meta = json::parse(meta_in);
  } catch (const json::exception& e) {
    throw IoError("load_dataset: bad meta.json: " + std::string(e.what()));
  }
  if (meta.value("schema", "") != "njode-dataset-v1")
    throw IoError("load_dataset: unsupported schema in " + dir.string());

  DatasetBundle bundle;
  bundle.d = meta.at("d").get<int>();
  bundle.meta = meta.at("meta");
  bundle.train_idx = meta.at("split").at("train").get<std::vector<int>>();
  bundle.val_idx = meta.at("split").at("val").get<std::vector<int>>();
  bundle.test_idx = meta.at("split").at("test").get<std::vector<int>>();
  const int n_paths = meta.at("n_paths").get<int>();

  std::ifstream in(dir / "paths.jsonl");
  if (!in) throw IoError("load_dataset: missing paths.jsonl in " + dir.string());
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      throw IoError("load_dataset: bad paths.jsonl record: " + std::string(e.what()));
    }
    PathSample p;
    p.d = bundle.d;
    p.times = rec.at("times").get<std::vector<double>>();
    p.values = rec.at("values").get<std::vector<double>>();
    if (p.values.size() != p.times.size() * static_cast<std::size_t>(bundle.d))
      throw IoError("load_dataset: value/time length mismatch");
    ObservationSet o;
    o.obs_indices = rec.at("obs_indices").get<std::vector<int>>();
    o.masks = rec.at("masks").get<std::vector<std::uint8_t>>();
    o.input_flags.assign(o.obs_indices.size(), 1);
    validate_observations(o, p.n_times(), bundle.d);
    bundle.paths.push_back(std::move(p));
    bundle.observations.push_back(std::move(o));
  }
  if (bundle.n_paths() != n_paths)
    throw IoError("load_dataset: path count mismatch with meta.json");
  return bundle;
}

}  // namespace njode
