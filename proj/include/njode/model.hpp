#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "njode/mlp.hpp"
#include "njode/tape.hpp"
#include "njode/types.hpp"

namespace njode {

struct ModelConfig {
  int d = 1;
  int d_H = 100;
  std::vector<int> hidden{100};  // shared by encoder / vector field / readout
  bool use_output_feedback = false;
  bool use_recurrent_jump = true;
  int signature_level = 0;  // 0 disables signature features
  int ode_substeps = 1;
};

// Trainable wiring; the numbers live in a ParamStore.
struct ModelParams {
  ModelConfig config;
  MLPParams encoder;      // jump network
  MLPParams vectorfield;  // latent drift
  MLPParams readout;
};

// Model output along one path. grid_values is time-major (n_times x d) and
// holds the post-jump prediction at observation times; pre_jump/post_jump
// are observation-major (count x d).
struct PredictionSeries {
  int d = 0;
  std::vector<double> grid_values;
  std::vector<double> pre_jump;
  std::vector<double> post_jump;
};

// Width of the signature feature block (0 when disabled). The signature is
// taken over time-augmented points (t, value*mask), alphabet size 1+d.
int model_signature_dim(const ModelConfig& cfg);

// Network input widths implied by the config. Feedback inputs sit at the
// end of each concat so a feedback model with zeroed trailing weight
// columns reproduces the no-feedback model exactly.
int encoder_in_dim(const ModelConfig& cfg);
int vectorfield_in_dim(const ModelConfig& cfg);

// Registers the three networks' segments on the store (encoder, vector
// field, readout, in that order). Parameters start at zero.
ModelParams build_model(ad::ParamStore& store, const ModelConfig& cfg);

// Seeded init of all three networks (weights uniform +-1/sqrt(fan_in),
// biases zero), consuming draws in registration order.
void init_model(ad::ParamStore& store, const ModelParams& mp, std::uint64_t seed);

// Full forward pass without a tape: jump at input-used observations, Euler
// between grid points, readout everywhere. Output depends only on
// observations with input_flag = 1.
PredictionSeries forward_path(const ad::ParamStore& store, const ModelParams& mp,
                              const PathSample& path, const ObservationSet& obs);

struct Checkpoint {
  ad::ParamStore store;
  ModelParams model;
};

// JSON checkpoint: schema tag + config + one flat array per parameter
// segment. load(save(x)) is bit-exact.
void save_checkpoint(const std::filesystem::path& file, const ad::ParamStore& store,
                     const ModelParams& mp);
Checkpoint load_checkpoint(const std::filesystem::path& file);

}  // namespace njode
