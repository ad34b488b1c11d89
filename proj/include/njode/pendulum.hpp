#pragma once

#include <functional>
#include <vector>

#include "njode/types.hpp"

namespace njode {

struct PendulumConstants {
  double m1 = 1.0;
  double m2 = 1.0;
  double l1 = 1.0;
  double l2 = 1.0;
  double g = 9.81;
};

// State layout: (alpha1, alpha2, p1, p2).
std::vector<double> pendulum_rhs(const std::vector<double>& state, const PendulumConstants& c);

// Hamiltonian of the same system; conserved along exact trajectories, which
// makes it the integrator's drift diagnostic.
double pendulum_energy(const std::vector<double>& state, const PendulumConstants& c);

using RhsFn = std::function<std::vector<double>(double t, const std::vector<double>& x)>;

// Classical fixed-step RK4; returns n_steps+1 grid points with times k*step.
PathSample rk4_integrate(const RhsFn& rhs, const std::vector<double>& x0, double step,
                         int n_steps);

// Max over the path of |H(t) - H(0)| / |H(0)|.
double pendulum_energy_drift(const PathSample& path, const PendulumConstants& c);

}  // namespace njode
