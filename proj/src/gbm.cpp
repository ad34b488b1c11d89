#include "njode/gbm.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "njode/errors.hpp"

namespace njode {

double GbmDrift::operator()(double t) const {
  switch (kind) {
    case Kind::kConstant:
      return mu;
    case Kind::kSinPlusOne:
      return std::sin(2.0 * std::numbers::pi * t) + 1.0;
  }
  throw ConfigError("gbm drift: unknown kind");
}

double GbmDrift::integral(double t0, double t1) const {
  switch (kind) {
    case Kind::kConstant:
      return mu * (t1 - t0);
    case Kind::kSinPlusOne: {
      const double tp = 2.0 * std::numbers::pi;
      return (t1 - t0) + (std::cos(tp * t0) - std::cos(tp * t1)) / tp;
    }
  }
  throw ConfigError("gbm drift: unknown kind");
}

namespace {

PathSample gbm_path_impl(double x0, const GbmDrift& drift, double sigma, double dt,
                         int n_steps, Rng& rng, bool exact) {
  if (dt <= 0.0) throw UsageError("gbm path: dt must be positive");
  if (x0 <= 0.0) throw UsageError("gbm path: x0 must be positive");
  if (sigma < 0.0) throw UsageError("gbm path: sigma must be nonnegative");
  if (n_steps < 1) throw UsageError("gbm path: need at least one step");

  PathSample out;
  out.d = 1;
  out.times.resize(static_cast<std::size_t>(n_steps) + 1);
  out.values.resize(static_cast<std::size_t>(n_steps) + 1);

  const double sqdt = std::sqrt(dt);
  double x = x0;
  for (int k = 0; k <= n_steps; ++k) {
    out.times[static_cast<std::size_t>(k)] = k * dt;
    if (!std::isfinite(x))
      throw GenerationError("gbm path: non-finite value at step " + std::to_string(k));
    out.values[static_cast<std::size_t>(k)] = x;
    if (k == n_steps) break;
    const double t = k * dt;
    const double z = rng.normal();
    if (exact)
      x = x * std::exp(drift.integral(t, t + dt) - 0.5 * sigma * sigma * dt + sigma * sqdt * z);
    else
      x = x + drift(t) * x * dt + sigma * x * sqdt * z;
  }
  return out;
}

}  // namespace

PathSample gbm_euler_path(double x0, const GbmDrift& drift, double sigma, double dt,
                          int n_steps, Rng& rng) {
  return gbm_path_impl(x0, drift, sigma, dt, n_steps, rng, false);
}

PathSample gbm_exact_path(double x0, const GbmDrift& drift, double sigma, double dt,
                          int n_steps, Rng& rng) {
  return gbm_path_impl(x0, drift, sigma, dt, n_steps, rng, true);
}

}  // namespace njode
