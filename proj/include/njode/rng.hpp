#pragma once

#include <cmath>
#include <cstdint>

namespace njode {

inline std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

// Stable seed derivation for independent substreams. Each (base, a, b, c)
// tuple yields the same child seed on every platform, which is what makes
// parallel and serial dataset generation bit-identical.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t s = mix64(base + 0x9E3779B97F4A7C15ULL);
  s = mix64(s ^ mix64(a + 0xD1B54A32D192ED03ULL));
  s = mix64(s ^ mix64(b + 0x8CB92BA72F3D8DD7ULL));
  s = mix64(s ^ mix64(c + 0x2545F4914F6CDD1DULL));
  return s;
}

// Substream tags used when deriving child seeds.
namespace stream {
constexpr std::uint64_t kInit = 1;      // parameter initialization
constexpr std::uint64_t kGating = 2;    // per-epoch input gating draws
constexpr std::uint64_t kShuffle = 3;   // per-epoch batch shuffling
constexpr std::uint64_t kObs = 4;       // observation-time sampling
constexpr std::uint64_t kInitial = 5;   // initial-condition sampling
constexpr std::uint64_t kNoise = 6;     // SDE driving noise
}  // namespace stream

// Deterministic generator: splitmix64 state walk, uniform doubles in [0,1),
// normals via the trigonometric Box-Muller transform (inverse-free) with the
// usual cached spare.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  double exponential(double lambda) { return -std::log1p(-uniform()) / lambda; }

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace njode
