#pragma once

#include <cstdint>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "njode/gbm.hpp"
#include "njode/pendulum.hpp"
#include "njode/types.hpp"

namespace njode {

struct SplitSpec {
  double val_fraction = 0.2;
  double test_fraction = 0.1;
};

struct PendulumDatasetConfig {
  int n_paths = 20000;
  double obs_prob = 0.1;
  double step = 0.025;
  double horizon = 2.5;
  double alpha_mean = std::numbers::pi;
  double alpha_std = 0.2;
  bool endpoint_observable = true;
  SplitSpec split;
  std::uint64_t seed = 0;
  PendulumConstants constants;
};

struct GbmDatasetConfig {
  std::string variant = "BS-Base";  // BS-Base | BS-HighFreq | BS-TimeDep
  int n_paths = 20000;
  double dt = 0.01;
  double horizon = 1.0;
  double x0 = 1.0;
  double sigma = 0.3;
  std::string scheme = "exact";  // exact | euler
  bool endpoint_observable = true;
  SplitSpec split;
  std::uint64_t seed = 0;
};

struct DatasetBundle {
  int d = 0;
  std::vector<PathSample> paths;
  std::vector<ObservationSet> observations;
  std::vector<int> train_idx;
  std::vector<int> val_idx;
  std::vector<int> test_idx;
  nlohmann::json meta;

  int n_paths() const { return static_cast<int>(paths.size()); }
};

// Observation probability and drift implied by a GBM variant name.
double gbm_obs_prob(const std::string& variant);
GbmDrift gbm_variant_drift(const std::string& variant);

// Index 0 always observed with full mask and input_flag 1; each later grid
// index observed independently with probability prob. input_flags start
// all-ones (training applies gating on top). include_last exposes the final
// grid point to observation sampling like any interior point.
ObservationSet sample_observations(int grid_len, double prob, std::uint64_t seed, int d = 1,
                                   bool include_last = true);

// Contiguous train/val/test split (paths are i.i.d., so position carries no
// information); sizes are rounded fractions of n.
void split_indices(int n, const SplitSpec& split, std::vector<int>& train,
                   std::vector<int>& val, std::vector<int>& test);

DatasetBundle sample_pendulum_dataset(const PendulumDatasetConfig& cfg);
DatasetBundle sample_gbm_dataset(const GbmDatasetConfig& cfg);

// Layout: <dir>/meta.json (schema tag, generator metadata, split) and
// <dir>/paths.jsonl (one record per path: times, flat time-major values,
// obs_indices, flat masks). Round-trips are lossless at 64-bit precision.
void save_dataset(const DatasetBundle& bundle, const std::filesystem::path& dir);
DatasetBundle load_dataset(const std::filesystem::path& dir);

}  // namespace njode
