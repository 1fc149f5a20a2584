/**
 * @file measures.hpp
 * @brief The four unified measures: FTLE, SNIFTLE, S², Q².
 *
 * FTLE    = (1/t) ln‖∇F₀ᵗ‖
 * SNIFTLE = (1/t) ln‖∇F₀ᵗ Ψ₀‖ with Ξ₀ = Ψ₀ Ψ₀ᵀ (reduces to FTLE at Ξ₀ = I)
 * S²      = ‖J K_t Jᵀ‖   (noise scale cancelled analytically)
 * Q²      = ‖J Ξ₀ Jᵀ‖    (initial-condition scale cancelled analytically)
 *
 * The supremum over unit projections behind S² and Q² is the matrix
 * operator norm; no numerical search happens here. The Monte Carlo module
 * validates that reduction empirically.
 */
#pragma once

#include <cmath>

#include "sniftle/covariance.hpp"
#include "sniftle/errors.hpp"
#include "sniftle/flowmap.hpp"
#include "sniftle/matops.hpp"

namespace sniftle {

struct MeasureRecord {
  Vec xi0;
  double t = 0.0;
  double ftle = 0.0;
  double sniftle = 0.0;
  double s2 = 0.0;
  double q2 = 0.0;
};

inline double ftle(const FlowSolution& sol) {
  if (!(sol.t > 0.0)) throw UndefinedMeasureError("ftle: undefined at t = 0");
  return std::log(operator_norm(sol.jacobian)) / sol.t;
}

inline double sniftle_exponent(const FlowSolution& sol, const SpdMat& xi_cov) {
  if (!(sol.t > 0.0)) throw UndefinedMeasureError("sniftle: undefined at t = 0");
  const Mat psi = cholesky(xi_cov.mat());
  return std::log(operator_norm(sol.jacobian * psi)) / sol.t;
}

inline double s2(const FlowSolution& sol) {
  return spd_norm(congruence(sol.jacobian, sol.quad));
}

inline double q2(const FlowSolution& sol, const SpdMat& xi_cov) {
  return spd_norm(congruence(sol.jacobian, xi_cov.mat()));
}

/// One flow solve feeding all four measures for a single (ξ₀, t).
inline MeasureRecord measures_from_solution(const FlowSolution& sol,
                                            const SpdMat& xi_cov) {
  MeasureRecord r;
  r.xi0 = sol.xi0;
  r.t = sol.t;
  r.ftle = ftle(sol);
  r.sniftle = sniftle_exponent(sol, xi_cov);
  r.s2 = s2(sol);
  r.q2 = q2(sol, xi_cov);
  return r;
}

inline MeasureRecord measure_record(const SystemModel& model, const Vec& xi0, double t,
                                    const SpdMat& xi_cov,
                                    const IntegratorConfig& cfg = {}) {
  if (!(t > 0.0)) throw UndefinedMeasureError("measure_record: t must be > 0");
  return measures_from_solution(solve_flow(model, xi0, t, cfg), xi_cov);
}

}  // namespace sniftle
