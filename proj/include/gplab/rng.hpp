#pragma once

#include <cmath>
#include <cstdint>

namespace gplab::rng {

// Counter-based generator: output i is a pure function of (seed, i).
// State advance and finalizer are the splitmix64 constants; the uniform
// stage is integer-only and therefore bit-identical on every platform.
// The normal stage is the Box-Muller transform (sqrt/log/cos from libm).
//
//   advance:   0x9E3779B97F4A7C15  (golden-ratio increment)
//   finalize:  z ^= z>>30; z *= 0xBF58476D1CE4E5B9;
//              z ^= z>>27; z *= 0x94D049BB133111EB; z ^= z>>31;

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
inline constexpr std::uint64_t kStreamSalt = 0x632BE59BD9B4E019ULL;

inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

inline std::uint64_t counter_u64(std::uint64_t seed, std::uint64_t counter) {
  return mix64(seed + (counter + 1) * kGolden);
}

// uniform on [0, 1), 53-bit resolution
inline double counter_uniform(std::uint64_t seed, std::uint64_t counter) {
  return static_cast<double>(counter_u64(seed, counter) >> 11) * 0x1.0p-53;
}

// standard normal; consumes counters 2*pair and 2*pair+1
inline double counter_normal(std::uint64_t seed, std::uint64_t pair) {
  // u1 in (0, 1] keeps the log finite
  const double u1 =
      static_cast<double>((counter_u64(seed, 2 * pair) >> 11) + 1) * 0x1.0p-53;
  const double u2 = counter_uniform(seed, 2 * pair + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

// Collision-resistant (seed, stream) -> seed mix for independent substreams.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return mix64(seed ^ mix64(stream * kGolden + kStreamSalt));
}

// Stateful convenience wrapper around the counter functions.
struct Stream {
  std::uint64_t seed = 0;
  std::uint64_t counter = 0;

  explicit Stream(std::uint64_t s) : seed(s) {}

  std::uint64_t u64() { return counter_u64(seed, counter++); }
  double uniform() { return counter_uniform(seed, counter++); }

  double normal() {
    const double u1 = static_cast<double>((u64() >> 11) + 1) * 0x1.0p-53;
    const double u2 = static_cast<double>(u64() >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  // uniform integer in [0, n), unbiased via rejection
  int below(int n) {
    const std::uint64_t lim = UINT64_MAX - UINT64_MAX % static_cast<std::uint64_t>(n);
    std::uint64_t r;
    do {
      r = u64();
    } while (r >= lim);
    return static_cast<int>(r % static_cast<std::uint64_t>(n));
  }

  int sign() { return (u64() & 1) ? 1 : -1; }
};

}  // namespace gplab::rng
