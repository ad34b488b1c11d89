#pragma once

#include <string>

#include "njode/rng.hpp"
#include "njode/types.hpp"

namespace njode {

// Drift of dX = mu(t) X dt + sigma X dW. The two shapes used by the
// experiments, with exact antiderivatives so conditional expectations and
// the exact sampling scheme share one implementation.
struct GbmDrift {
  enum class Kind { kConstant, kSinPlusOne };
  Kind kind = Kind::kConstant;
  double mu = 2.0;  // constant case only

  double operator()(double t) const;
  double integral(double t0, double t1) const;
};

// Euler-Maruyama: X_{k+1} = X_k + mu(t_k) X_k dt + sigma X_k sqrt(dt) Z_k.
// One standard normal per step, drawn from rng in step order.
PathSample gbm_euler_path(double x0, const GbmDrift& drift, double sigma, double dt,
                          int n_steps, Rng& rng);

// Exact lognormal stepping: X_{k+1} = X_k exp(I_k - sigma^2 dt/2 + sigma sqrt(dt) Z_k)
// with I_k the drift integral over the step. Marginals match the SDE exactly,
// so dataset moments sit on the closed form. Same rng consumption as Euler.
PathSample gbm_exact_path(double x0, const GbmDrift& drift, double sigma, double dt,
                          int n_steps, Rng& rng);

}  // namespace njode
