#include "njode/fdcheck.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "njode/errors.hpp"

namespace njode {

double finite_diff_check(const std::function<double(std::span<const double>)>& f,
                         std::span<const double> point,
                         std::span<const double> grad_ad, double eps) {
  if (eps <= 0.0) throw UsageError("finite_diff_check: eps must be positive");
  if (point.size() != grad_ad.size())
    throw UsageError("finite_diff_check: point/grad length mismatch");

  std::vector<double> x(point.begin(), point.end());
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    x[i] = xi + eps;
    const double fp = f(x);
    x[i] = xi - eps;
    const double fm = f(x);
    x[i] = xi;
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw TrainingError("finite_diff_check: non-finite evaluation at coordinate " +
                          std::to_string(i));
    const double g_fd = (fp - fm) / (2.0 * eps);
    const double g_ad = grad_ad[i];
    const double rel = std::abs(g_ad - g_fd) / std::max(1e-12, std::abs(g_ad) + std::abs(g_fd));
    worst = std::max(worst, rel);
  }
  return worst;
}

}  // namespace njode
