#pragma once

#include <functional>
#include <span>
#include <vector>

namespace njode {

// Max over coordinates of |g_ad - g_fd| / max(1e-12, |g_ad| + |g_fd|), with
// g_fd a central difference of f at the point. Throws TrainingError naming
// the coordinate if f returns a non-finite value.
double finite_diff_check(const std::function<double(std::span<const double>)>& f,
                         std::span<const double> point,
                         std::span<const double> grad_ad, double eps);

}  // namespace njode
