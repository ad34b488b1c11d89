#include "njode/gating.hpp"

#include <algorithm>

#include "njode/errors.hpp"
#include "njode/rng.hpp"

namespace njode {

std::string schedule_kind_name(ScheduleSpec::Kind kind) {
  switch (kind) {
    case ScheduleSpec::Kind::kAlways: return "always";
    case ScheduleSpec::Kind::kNever: return "never";
    case ScheduleSpec::Kind::kFixed: return "fixed";
    case ScheduleSpec::Kind::kLinearDecay: return "linear_decay";
    case ScheduleSpec::Kind::kExponentialGap: return "exponential_gap";
  }
  throw ConfigError("schedule: unknown kind");
}

ScheduleSpec::Kind schedule_kind_from_name(const std::string& name) {
  if (name == "always") return ScheduleSpec::Kind::kAlways;
  if (name == "never") return ScheduleSpec::Kind::kNever;
  if (name == "fixed") return ScheduleSpec::Kind::kFixed;
  if (name == "linear_decay") return ScheduleSpec::Kind::kLinearDecay;
  if (name == "exponential_gap") return ScheduleSpec::Kind::kExponentialGap;
  throw ConfigError("schedule: unknown kind '" + name + "'");
}

std::vector<std::uint8_t> bernoulli_gating(int observation_count, double p, std::uint64_t seed) {
  if (observation_count < 1) throw UsageError("bernoulli_gating: need at least one observation");
  if (!(p >= 0.0 && p <= 1.0)) throw UsageError("bernoulli_gating: p must be in [0,1]");
  std::vector<std::uint8_t> flags(static_cast<std::size_t>(observation_count), 0);
  flags[0] = 1;
  Rng rng(seed);
  for (int k = 1; k < observation_count; ++k)
    flags[static_cast<std::size_t>(k)] = rng.uniform() < p ? 1 : 0;
  return flags;
}

std::vector<std::uint8_t> exponential_gap_gating(const std::vector<double>& obs_times,
                                                 double lambda, std::uint64_t seed) {
  if (obs_times.empty()) throw UsageError("exponential_gap_gating: empty observation times");
  if (!(lambda > 0.0)) throw UsageError("exponential_gap_gating: lambda must be positive");
  for (std::size_t k = 1; k < obs_times.size(); ++k)
    if (obs_times[k] <= obs_times[k - 1])
      throw UsageError("exponential_gap_gating: times must be increasing");

  std::vector<std::uint8_t> flags(obs_times.size(), 0);
  flags[0] = 1;
  Rng rng(seed);
  std::size_t i = 0;  // last used observation
  while (true) {
    const double gap = rng.exponential(lambda);
    std::size_t next = i + 1;
    while (next < obs_times.size() && obs_times[next] - obs_times[i] < gap) ++next;
    if (next >= obs_times.size()) break;
    flags[next] = 1;
    i = next;
  }
  return flags;
}

double schedule_p(int epoch, const ScheduleSpec& spec) {
  if (epoch < 0) throw UsageError("schedule_p: epoch must be nonnegative");
  switch (spec.kind) {
    case ScheduleSpec::Kind::kAlways:
      return 1.0;
    case ScheduleSpec::Kind::kNever:
      return 0.0;
    case ScheduleSpec::Kind::kFixed:
      if (!(spec.p >= 0.0 && spec.p <= 1.0)) throw ConfigError("schedule: fixed p must be in [0,1]");
      return spec.p;
    case ScheduleSpec::Kind::kLinearDecay:
      if (!(spec.e0 > 0.0)) throw ConfigError("schedule: linear_decay needs e0 > 0");
      return std::max(0.0, 1.0 - static_cast<double>(epoch) / spec.e0);
    case ScheduleSpec::Kind::kExponentialGap:
      throw ConfigError("schedule: exponential_gap has no epoch probability");
  }
  throw ConfigError("schedule: unknown kind");
}

std::vector<std::uint8_t> draw_gating(const ScheduleSpec& spec, int epoch,
                                      const std::vector<double>& obs_times, std::uint64_t seed) {
  const int count = static_cast<int>(obs_times.size());
  if (spec.kind == ScheduleSpec::Kind::kExponentialGap) {
    if (!(spec.lambda > 0.0)) throw ConfigError("schedule: exponential_gap needs lambda > 0");
    return exponential_gap_gating(obs_times, spec.lambda, seed);
  }
  return bernoulli_gating(count, schedule_p(epoch, spec), seed);
}

}  // namespace njode
