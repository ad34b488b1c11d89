#include "njode/pendulum.hpp"

#include <cmath>
#include <string>

#include "njode/errors.hpp"

namespace njode {

namespace {

bool all_finite(const std::vector<double>& x) {
  for (double v : x)
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace

std::vector<double> pendulum_rhs(const std::vector<double>& state, const PendulumConstants& c) {
  if (state.size() != 4) throw UsageError("pendulum_rhs: state must have 4 components");
  if (!all_finite(state)) throw GenerationError("pendulum_rhs: non-finite state");
  const double a1 = state[0], a2 = state[1], p1 = state[2], p2 = state[3];
  const double m1 = c.m1, m2 = c.m2, l1 = c.l1, l2 = c.l2, g = c.g;

  const double delta = a1 - a2;
  const double sd = std::sin(delta);
  const double cd = std::cos(delta);
  const double A0 = m1 + m2 * sd * sd;
  const double A1 = p1 * p2 * sd / (l1 * l2 * A0);
  const double A2 = (p1 * p1 * m2 * l2 * l2 - 2.0 * p1 * p2 * m2 * l1 * l2 * cd +
                     p2 * p2 * (m1 + m2) * l1 * l1) *
                    std::sin(2.0 * delta) / (2.0 * l1 * l1 * l2 * l2 * A0 * A0);

  std::vector<double> dx(4);
  dx[0] = (p1 * l2 - p2 * l1 * cd) / (l1 * l1 * l2 * A0);
  dx[1] = (p2 * (m1 + m2) * l1 - p1 * m2 * l2 * cd) / (m2 * l1 * l2 * l2 * A0);
  dx[2] = -(m1 + m2) * g * l1 * std::sin(a1) - A1 + A2;
  dx[3] = -m2 * g * l2 * std::sin(a2) + A1 - A2;
  return dx;
}

double pendulum_energy(const std::vector<double>& state, const PendulumConstants& c) {
  if (state.size() != 4) throw UsageError("pendulum_energy: state must have 4 components");
  const double a1 = state[0], a2 = state[1], p1 = state[2], p2 = state[3];
  const double m1 = c.m1, m2 = c.m2, l1 = c.l1, l2 = c.l2, g = c.g;
  const double delta = a1 - a2;
  const double sd = std::sin(delta);
  const double cd = std::cos(delta);
  const double A0 = m1 + m2 * sd * sd;
  const double kin = (m2 * l2 * l2 * p1 * p1 + (m1 + m2) * l1 * l1 * p2 * p2 -
                      2.0 * m2 * l1 * l2 * p1 * p2 * cd) /
                     (2.0 * m2 * l1 * l1 * l2 * l2 * A0);
  const double pot = -(m1 + m2) * g * l1 * std::cos(a1) - m2 * g * l2 * std::cos(a2);
  return kin + pot;
}

PathSample rk4_integrate(const RhsFn& rhs, const std::vector<double>& x0, double step,
                         int n_steps) {
  if (step <= 0.0) throw UsageError("rk4_integrate: step must be positive");
  if (n_steps < 1) throw UsageError("rk4_integrate: need at least one step");
  const int d = static_cast<int>(x0.size());

  PathSample out;
  out.d = d;
  out.times.resize(static_cast<std::size_t>(n_steps) + 1);
  out.values.resize((static_cast<std::size_t>(n_steps) + 1) * d);

  std::vector<double> x = x0;
  std::vector<double> xt(static_cast<std::size_t>(d));
  for (int k = 0; k <= n_steps; ++k) {
    out.times[static_cast<std::size_t>(k)] = k * step;
    if (!all_finite(x))
      throw GenerationError("rk4_integrate: non-finite state at step " + std::to_string(k));
    std::copy(x.begin(), x.end(), out.values.begin() + static_cast<std::size_t>(k) * d);
    if (k == n_steps) break;

    const double t = k * step;
    const std::vector<double> k1 = rhs(t, x);
    for (int j = 0; j < d; ++j) xt[j] = x[j] + 0.5 * step * k1[j];
    const std::vector<double> k2 = rhs(t + 0.5 * step, xt);
    for (int j = 0; j < d; ++j) xt[j] = x[j] + 0.5 * step * k2[j];
    const std::vector<double> k3 = rhs(t + 0.5 * step, xt);
    for (int j = 0; j < d; ++j) xt[j] = x[j] + step * k3[j];
    const std::vector<double> k4 = rhs(t + step, xt);
    for (int j = 0; j < d; ++j)
      x[j] += step / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
  }
  return out;
}

double pendulum_energy_drift(const PathSample& path, const PendulumConstants& c) {
  if (path.d != 4) throw UsageError("pendulum_energy_drift: expected 4-dimensional path");
  std::vector<double> s(4);
  for (int j = 0; j < 4; ++j) s[j] = path.value(0, j);
  const double h0 = pendulum_energy(s, c);
  const double scale = std::abs(h0) > 0.0 ? std::abs(h0) : 1.0;
  double worst = 0.0;
  for (int k = 1; k < path.n_times(); ++k) {
    for (int j = 0; j < 4; ++j) s[j] = path.value(k, j);
    worst = std::max(worst, std::abs(pendulum_energy(s, c) - h0) / scale);
  }
  return worst;
}

}  // namespace njode
