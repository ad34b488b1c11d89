#pragma once

#include <cstdint>
#include <vector>

#include "njode/tape.hpp"

namespace njode {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::int64_t step = 0;
  std::vector<double> m;
  std::vector<double> v;
};

AdamState adam_init(std::size_t n_params);

// One update from store.grad into store.theta. Throws TrainingError on a
// non-finite gradient, naming the parameter segment.
void adam_step(ad::ParamStore& store, AdamState& state, const AdamConfig& cfg);

}  // namespace njode
