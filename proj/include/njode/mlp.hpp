#pragma once

#include <string>
#include <vector>

#include "njode/rng.hpp"
#include "njode/tape.hpp"

namespace njode {

// Feed-forward net: tanh on hidden layers, identity on the output layer.
struct MLPSpec {
  int in_dim = 0;
  std::vector<int> hidden;
  int out_dim = 0;
};

// Parameter segments live in a ParamStore; this is just the wiring.
struct MLPParams {
  MLPSpec spec;
  std::vector<int> seg_w;
  std::vector<int> seg_b;
  int n_layers() const { return static_cast<int>(seg_w.size()); }
};

// Registers weight/bias segments (named "<name>.w0", "<name>.b0", ...) in
// layer order. Values start at zero; call init_mlp to randomize.
MLPParams add_mlp(ad::ParamStore& store, const std::string& name, const MLPSpec& spec);

// Weights ~ U(-1/sqrt(fan_in), +1/sqrt(fan_in)), biases zero. Draws are
// consumed in segment order so the result is a pure function of rng state.
void init_mlp(ad::ParamStore& store, const MLPParams& mlp, Rng& rng);

// Tape-recorded forward pass.
ad::Value mlp_forward(ad::Tape& tape, const MLPParams& mlp, ad::Value input);

// Plain evaluation through the same kernels (bit-identical to the tape pass).
std::vector<double> mlp_eval(const ad::ParamStore& store, const MLPParams& mlp,
                             const std::vector<double>& input);

}  // namespace njode
