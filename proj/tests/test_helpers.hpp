#pragma once

#include <cmath>
#include <cstdint>

#include "sniftle/matrix.hpp"
#include "sniftle/rng.hpp"

namespace sniftle::testing {

inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

/// Deterministic uniform in [lo, hi) from a test substream.
inline double uniform(SubstreamRng& rng, double lo, double hi) {
  return lo + (hi - lo) * rng.next_uniform();
}

inline Vec random_vec(SubstreamRng& rng, std::size_t n, double lo = -1.0,
                      double hi = 1.0) {
  Vec v(n);
  for (double& x : v) x = uniform(rng, lo, hi);
  return v;
}

inline Mat random_mat(SubstreamRng& rng, std::size_t n, double lo = -1.0,
                      double hi = 1.0) {
  Mat m(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = uniform(rng, lo, hi);
  return m;
}

/// Random symmetric positive-definite matrix: L Lᵀ with positive diagonal L.
inline Mat random_spd(SubstreamRng& rng, std::size_t n) {
  Mat l(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) l(i, j) = uniform(rng, -1.0, 1.0);
    l(i, i) = uniform(rng, 0.2, 2.0);
  }
  return l * transpose(l);
}

}  // namespace sniftle::testing
