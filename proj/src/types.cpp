#include "njode/types.hpp"

#include <string>

#include "njode/errors.hpp"

namespace njode {

void validate_observations(const ObservationSet& obs, int grid_len, int d) {
  const int n = obs.count();
  if (n < 1) throw UsageError("observations: need at least the t=0 observation");
  if (obs.masks.size() != static_cast<std::size_t>(n) * d)
    throw UsageError("observations: mask array length mismatch");
  if (obs.input_flags.size() != static_cast<std::size_t>(n))
    throw UsageError("observations: input_flags length mismatch");
  if (obs.obs_indices[0] != 0) throw UsageError("observations: first index must be 0");
  if (obs.input_flags[0] != 1) throw UsageError("observations: input_flags[0] must be 1");
  for (int j = 0; j < d; ++j)
    if (obs.masks[j] != 1) throw UsageError("observations: t=0 mask must be all-ones");
  for (int k = 1; k < n; ++k)
    if (obs.obs_indices[k] <= obs.obs_indices[k - 1])
      throw UsageError("observations: indices must be strictly increasing");
  if (obs.obs_indices[n - 1] >= grid_len)
    throw UsageError("observations: index " + std::to_string(obs.obs_indices[n - 1]) +
                     " out of grid range " + std::to_string(grid_len));
  for (int k = 0; k < n; ++k) {
    bool any = false;
    for (int j = 0; j < d; ++j) any = any || obs.masks[static_cast<std::size_t>(k) * d + j] != 0;
    if (!any) throw UsageError("observations: empty mask at observation " + std::to_string(k));
  }
}

}  // namespace njode
