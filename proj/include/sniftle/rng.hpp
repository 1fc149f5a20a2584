/**
 * @file rng.hpp
 * @brief Reproducible per-sample random substreams.
 *
 * Each Monte Carlo sample gets its own stream derived from (seed, sample
 * index) only, so ensembles are bit-reproducible regardless of how work is
 * scheduled across threads.
 *
 * Algorithm: the stream state is seeded by two rounds of the splitmix64
 * mixing function over seed and index, and the stream itself is the
 * splitmix64 sequence. Gaussian variates come from a Box-Muller transform
 * on 53-bit uniforms, with the spare cached. Everything here is fully
 * specified, so results do not depend on the standard library.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace sniftle {

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

class SubstreamRng {
 public:
  SubstreamRng(std::uint64_t seed, std::uint64_t stream_index) {
    std::uint64_t s = seed;
    const std::uint64_t a = splitmix64_next(s);
    s = a ^ (stream_index * 0xD1B54A32D192ED03ull + 0x8BB84B93962EACC9ull);
    splitmix64_next(s);  // decorrelate neighbouring indices
    state_ = s;
  }

  std::uint64_t next_u64() { return splitmix64_next(state_); }

  /// Uniform in (0, 1], 53-bit resolution.
  double next_uniform() {
    return (double(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; pairs are generated together.
  double next_normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  std::uint64_t state_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace sniftle
