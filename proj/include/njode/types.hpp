#pragma once

#include <cstdint>
#include <vector>

namespace njode {

// One realization on a fine regular grid. values is time-major:
// values[k*d + j] is coordinate j at times[k].
struct PathSample {
  int d = 0;
  std::vector<double> times;
  std::vector<double> values;

  int n_times() const { return static_cast<int>(times.size()); }
  double value(int k, int j) const { return values[static_cast<std::size_t>(k) * d + j]; }
  const double* value_row(int k) const { return values.data() + static_cast<std::size_t>(k) * d; }
};

// Which grid points are observed, what coordinates are visible there, and
// whether each observation is fed to the model. Index 0 (t=0) is always a
// fully observed, input-used observation; masks/input_flags over later
// observations are data, not config.
struct ObservationSet {
  std::vector<int> obs_indices;
  std::vector<std::uint8_t> masks;        // count*d, observation-major
  std::vector<std::uint8_t> input_flags;  // count

  int count() const { return static_cast<int>(obs_indices.size()); }
  const std::uint8_t* mask_row(int k, int d) const {
    return masks.data() + static_cast<std::size_t>(k) * d;
  }
};

// Throws UsageError when the set violates its contract: frozen index 0 with
// all-ones mask and input_flag 1, strictly increasing in-range indices,
// every mask row nonzero, aligned array lengths.
void validate_observations(const ObservationSet& obs, int grid_len, int d);

}  // namespace njode
