/**
 * @file covariance.hpp
 * @brief Covariance of the linearized solution, split into its
 *        initial-condition and model-noise terms.
 *
 * Λ_t(ξ₀; ε, δ) = δ² J Ξ₀ Jᵀ + ε² J K_t Jᵀ with J = ∇F₀ᵗ. Both terms are
 * kept separate: the noise term alone drives S² and the IC term alone
 * drives Q².
 */
#pragma once

#include <cmath>

#include "sniftle/errors.hpp"
#include "sniftle/flowmap.hpp"
#include "sniftle/matops.hpp"
#include "sniftle/matrix.hpp"

namespace sniftle {

struct UncertaintyScales {
  double eps;    // model-noise scale ε ≥ 0
  double delta;  // initial-condition scale δ ≥ 0
  SpdMat xi_cov; // Ξ₀

  UncertaintyScales(double eps_, double delta_, SpdMat xi)
      : eps(eps_), delta(delta_), xi_cov(std::move(xi)) {
    if (!(eps >= 0.0) || !(delta >= 0.0))
      throw InvalidInputError("UncertaintyScales: eps and delta must be >= 0");
  }
};

struct CovarianceDecomposition {
  Mat ic_term;    // δ² J Ξ₀ Jᵀ
  Mat noise_term; // ε² J K_t Jᵀ
  Mat total;      // ic_term + noise_term
};

inline CovarianceDecomposition covariance(const FlowSolution& sol,
                                          const UncertaintyScales& scales) {
  CovarianceDecomposition d;
  d.ic_term = (scales.delta * scales.delta) * congruence(sol.jacobian, scales.xi_cov.mat());
  d.noise_term = (scales.eps * scales.eps) * congruence(sol.jacobian, sol.quad);
  d.total = d.ic_term + d.noise_term;
  return d;
}

/// Gaussian law of the linearized solution: mean F₀ᵗ(ξ₀), covariance Λ_t.
inline std::pair<Vec, Mat> gaussian_predictive(const FlowSolution& sol,
                                               const UncertaintyScales& scales) {
  return {sol.position, covariance(sol, scales).total};
}

}  // namespace sniftle
