#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "njode/types.hpp"

namespace njode {

// Which observations are fed to the model during an epoch. The initial
// observation is always an input; everything else still enters the loss.
struct ScheduleSpec {
  enum class Kind { kAlways, kNever, kFixed, kLinearDecay, kExponentialGap };
  Kind kind = Kind::kAlways;
  double p = 1.0;        // fixed
  double e0 = 100.0;     // linear_decay: p(E) = max(0, 1 - E/e0)
  double lambda = 1.0;   // exponential_gap
};

std::string schedule_kind_name(ScheduleSpec::Kind kind);
ScheduleSpec::Kind schedule_kind_from_name(const std::string& name);

// Flag 0 forced to 1, later flags i.i.d. Bernoulli(p).
std::vector<std::uint8_t> bernoulli_gating(int observation_count, double p, std::uint64_t seed);

// Renewal-gap rule: from each used observation t_i draw e_i ~ Exp(lambda);
// the next used observation is the first t_k with t_k - t_i >= e_i.
std::vector<std::uint8_t> exponential_gap_gating(const std::vector<double>& obs_times,
                                                 double lambda, std::uint64_t seed);

// Input probability at an epoch for the probability-based kinds; the
// exponential-gap kind has no epoch probability and is rejected.
double schedule_p(int epoch, const ScheduleSpec& spec);

// Fresh input_flags for one path at one epoch.
std::vector<std::uint8_t> draw_gating(const ScheduleSpec& spec, int epoch,
                                      const std::vector<double>& obs_times, std::uint64_t seed);

}  // namespace njode
