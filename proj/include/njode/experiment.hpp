#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "njode/datagen.hpp"
#include "njode/eval.hpp"
#include "njode/model.hpp"
#include "njode/train.hpp"

namespace njode {

// Everything one run needs, resolved from a config document plus CLI
// overrides. The normalized form written to the run directory re-runs
// bit-identically without remembering the command line.
struct ExperimentConfig {
  std::string dataset_kind;  // "pendulum" | "gbm"
  PendulumDatasetConfig pendulum;
  GbmDatasetConfig gbm;

  ModelConfig model;
  std::string variant;  // one of the named variants, or "" for custom settings
  TrainConfig train;

  std::string eval_gating = "initial_only";  // "all" | "initial_only"
  bool track_metric = false;                 // per-epoch closed-form metric (gbm)
  std::vector<double> long_term_s;
  int export_count = 4;

  std::string out_dir = "runs";

  // set during validation; used to reject conflicting later overrides
  bool schedule_explicit = false;
  bool output_feedback_explicit = false;
};

struct VariantSpec {
  bool output_feedback = false;
  ScheduleSpec schedule;
  bool val_initial_only = false;
};

// N / N-OF / N-IS / N-OF-IS / N-IIS / N-OF-IIS.
VariantSpec variant_spec(const std::string& name);
const std::vector<std::string>& variant_names();

// Strict parse: unknown keys are fatal, cross-field constraints checked,
// defaults filled per dataset kind.
ExperimentConfig validate_config(const nlohmann::json& doc);

// Re-apply a variant chosen on the command line.
void override_variant(ExperimentConfig& cfg, const std::string& variant);

// Desk-scale knob: multiplies path counts, widths, epochs, batch size, and
// the decay horizon by `scale` (with small floors), leaving observation
// probabilities untouched.
void apply_scale(ExperimentConfig& cfg, double scale);

nlohmann::json normalize_config(const ExperimentConfig& cfg);

// fnv-1a of the canonical dump, hex-encoded; names run and dataset dirs.
std::string config_hash(const nlohmann::json& normalized);

// Content-addressed dataset: generates under <out>/datasets/<kind>-<hash>
// when absent, loads otherwise.
DatasetBundle ensure_dataset(const ExperimentConfig& cfg, std::filesystem::path* dir_out = nullptr);

nlohmann::json run_generate(const ExperimentConfig& cfg);
nlohmann::json run_train(const ExperimentConfig& cfg);
nlohmann::json run_evaluate(const ExperimentConfig& cfg, const std::filesystem::path& checkpoint);
nlohmann::json run_export(const ExperimentConfig& cfg, const std::filesystem::path& checkpoint);

// Scaled variant sweeps mirroring the reference tables. Summaries land in
// <out>/table1|table2 as CSV + JSON; per-variant run artifacts in subdirs.
nlohmann::json reproduce_table1(double scale, std::uint64_t seed,
                                const std::filesystem::path& out);
nlohmann::json reproduce_table2(double scale, std::uint64_t seed,
                                const std::filesystem::path& out);

}  // namespace njode
