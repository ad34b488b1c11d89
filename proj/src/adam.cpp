#include "njode/adam.hpp"

#include <cmath>
#include <string>

#include "njode/errors.hpp"

namespace njode {

AdamState adam_init(std::size_t n_params) {
  AdamState s;
  s.m.assign(n_params, 0.0);
  s.v.assign(n_params, 0.0);
  return s;
}

void adam_step(ad::ParamStore& store, AdamState& state, const AdamConfig& cfg) {
  if (cfg.lr <= 0.0) throw ConfigError("adam: learning rate must be positive");
  if (state.m.size() != store.size() || state.v.size() != store.size())
    throw UsageError("adam: state size does not match parameter count");

  for (std::size_t i = 0; i < store.grad.size(); ++i) {
    if (!std::isfinite(store.grad[i])) {
      std::string seg = "?";
      for (const auto& s : store.segs)
        if (i >= s.offset && i < s.offset + s.size()) { seg = s.name; break; }
      throw TrainingError("adam: non-finite gradient in segment " + seg);
    }
  }

  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < store.theta.size(); ++i) {
    const double g = store.grad[i];
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
    const double mhat = state.m[i] / c1;
    const double vhat = state.v[i] / c2;
    store.theta[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
  }
}

}  // namespace njode
