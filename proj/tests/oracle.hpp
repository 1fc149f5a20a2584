#pragma once

// Test-only oracle: flow-map Jacobian by central differences of neighboring
// trajectories, independent of the variational-equation path it checks.

#include <cmath>

#include "sniftle/flowmap.hpp"
#include "sniftle/matrix.hpp"

namespace sniftle::testing {

inline Vec advect_only(const SystemModel& model, Vec x, double t, double h) {
  const std::size_t nsteps =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(t / h - 1e-9)));
  for (std::size_t k = 0; k < nsteps; ++k) {
    const double tk = double(k) * h;
    const double hk = (k + 1 == nsteps) ? t - tk : h;
    const Vec k1 = model.u(x, tk);
    const Vec k2 = model.u(x + (0.5 * hk) * k1, tk + 0.5 * hk);
    const Vec k3 = model.u(x + (0.5 * hk) * k2, tk + 0.5 * hk);
    const Vec k4 = model.u(x + hk * k3, tk + hk);
    for (std::size_t j = 0; j < x.size(); ++j)
      x[j] += (hk / 6.0) * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
  }
  return x;
}

inline Mat finite_difference_jacobian(const SystemModel& model, const Vec& xi0,
                                      double t, double step, double offset) {
  const std::size_t n = model.n;
  Mat j(n);
  for (std::size_t col = 0; col < n; ++col) {
    Vec xp = xi0, xm = xi0;
    xp[col] += offset;
    xm[col] -= offset;
    const Vec fp = advect_only(model, xp, t, step);
    const Vec fm = advect_only(model, xm, t, step);
    for (std::size_t row = 0; row < n; ++row)
      j(row, col) = (fp[row] - fm[row]) / (2.0 * offset);
  }
  return j;
}

}  // namespace sniftle::testing
