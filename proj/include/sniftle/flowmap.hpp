/**
 * @file flowmap.hpp
 * @brief Deterministic flow map with variational, inverse-variational and
 *        covariance-quadrature equations, integrated as one augmented system.
 *
 * One fixed-step classical RK4 advances, simultaneously:
 *   dx/dτ     = u(x, τ)
 *   dJ/dτ     = ∇u(x, τ) · J            J(0) = I
 *   dJ⁻¹/dτ   = −J⁻¹ · ∇u(x, τ)         J⁻¹(0) = I   (adjoint_ode mode)
 *   dK/dτ     = M Mᵀ,  M = J⁻¹ σ(x, τ)  K(0) = 0
 *
 * Keeping everything in the same stages keeps all quantities consistent at
 * 4th order with a single step-size knob.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "sniftle/errors.hpp"
#include "sniftle/flowfield.hpp"
#include "sniftle/matops.hpp"
#include "sniftle/matrix.hpp"

namespace sniftle {

enum class JacobianInverseMode { kAdjointOde, kDirectInvert };

struct IntegratorConfig {
  double step_size = 1e-3;
  JacobianInverseMode jacobian_inverse_mode = JacobianInverseMode::kAdjointOde;
  double defect_threshold = 1e-6;

  void validate(double t) const {
    if (!(step_size > 0.0)) throw InvalidInputError("IntegratorConfig: step_size must be > 0");
    if (!(step_size <= t))
      throw InvalidInputError("IntegratorConfig: step_size exceeds horizon t");
  }
};

struct FlowSolution {
  Vec xi0;
  double t = 0.0;
  Vec position;
  Mat jacobian;
  Mat jacobian_inverse;
  Mat quad;  // K_t = ∫₀ᵗ M Mᵀ dτ, symmetric PSD
  double consistency_defect = 0.0;
};

namespace detail {

struct AugState {
  Vec x;
  Mat j;
  Mat jinv;
  Mat k;
};

struct AugDeriv {
  Vec dx;
  Mat dj;
  Mat djinv;
  Mat dk;
};

inline AugState axpy(const AugState& y, double h, const AugDeriv& d, bool full) {
  AugState out = y;
  for (std::size_t i = 0; i < y.x.size(); ++i) out.x[i] += h * d.dx[i];
  out.j += h * d.dj;
  if (full) {
    out.jinv += h * d.djinv;
    out.k += h * d.dk;
  }
  return out;
}

}  // namespace detail

namespace detail {

/// RK4 core shared by solve_flow and flow_map_only. `full` enables the
/// inverse-Jacobian and quadrature equations.
class FlowIntegrator {
 public:
  FlowIntegrator(const SystemModel& model, const IntegratorConfig& cfg, bool full)
      : model_(model), cfg_(cfg), full_(full) {}

  AugState initial(const Vec& xi0) const {
    const std::size_t n = model_.n;
    return {xi0, Mat::identity(n), Mat::identity(n), Mat::zero(n)};
  }

  /// Advances from t0 to t1 with fixed steps, the final step shortened to
  /// land exactly on t1.
  void advance(AugState& y, double t0, double t1) const {
    const double h = cfg_.step_size;
    const double span = t1 - t0;
    if (!(span > 0.0)) return;
    const std::size_t nsteps =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(span / h - 1e-9)));
    for (std::size_t k = 0; k < nsteps; ++k) {
      const double tk = t0 + double(k) * h;
      const double hk = (k + 1 == nsteps) ? t1 - tk : h;
      step(y, tk, hk);
    }
  }

  FlowSolution finalize(const Vec& xi0, double t, AugState y) const {
    FlowSolution sol;
    sol.xi0 = xi0;
    sol.t = t;
    sol.position = std::move(y.x);
    sol.jacobian = std::move(y.j);
    sol.jacobian_inverse =
        full_ && cfg_.jacobian_inverse_mode == JacobianInverseMode::kAdjointOde
            ? std::move(y.jinv)
            : detail::gauss_jordan_inverse(sol.jacobian);
    sol.quad = full_ ? clamp_psd(y.k, 1e-10) : Mat::zero(model_.n);
    sol.consistency_defect =
        operator_norm(sol.jacobian * sol.jacobian_inverse - Mat::identity(model_.n));
    if (!(sol.consistency_defect <= cfg_.defect_threshold))
      throw ConditioningError(
          "flow solve: J·J⁻¹ defect " + std::to_string(sol.consistency_defect) +
          " exceeds threshold; reduce step_size or the horizon");
    return sol;
  }

 private:
  AugDeriv rhs(const AugState& y, double tau) const {
    AugDeriv d;
    try {
      d.dx = model_.u(y.x, tau);
    } catch (const DomainError& e) {
      throw DomainError(std::string("trajectory left the domain: ") + e.what(), tau);
    }
    const Mat g = model_.grad_u(y.x, tau);
    d.dj = g * y.j;
    if (full_) {
      const Mat jinv = cfg_.jacobian_inverse_mode == JacobianInverseMode::kAdjointOde
                           ? y.jinv
                           : detail::gauss_jordan_inverse(y.j);
      d.djinv = -1.0 * (jinv * g);
      const Mat m = jinv * model_.sigma(y.x, tau);
      d.dk = m * transpose(m);
    } else {
      d.djinv = Mat::zero(model_.n);
      d.dk = Mat::zero(model_.n);
    }
    return d;
  }

  void step(AugState& y, double tk, double hk) const {
    const AugDeriv k1 = rhs(y, tk);
    const AugDeriv k2 = rhs(axpy(y, 0.5 * hk, k1, full_), tk + 0.5 * hk);
    const AugDeriv k3 = rhs(axpy(y, 0.5 * hk, k2, full_), tk + 0.5 * hk);
    const AugDeriv k4 = rhs(axpy(y, hk, k3, full_), tk + hk);
    const double w = hk / 6.0;
    for (std::size_t i = 0; i < y.x.size(); ++i)
      y.x[i] += w * (k1.dx[i] + 2.0 * k2.dx[i] + 2.0 * k3.dx[i] + k4.dx[i]);
    y.j += w * (k1.dj + 2.0 * k2.dj + 2.0 * k3.dj + k4.dj);
    if (full_) {
      y.jinv += w * (k1.djinv + 2.0 * k2.djinv + 2.0 * k3.djinv + k4.djinv);
      y.k += w * (k1.dk + 2.0 * k2.dk + 2.0 * k3.dk + k4.dk);
    }
  }

  const SystemModel& model_;
  const IntegratorConfig& cfg_;
  bool full_;
};

}  // namespace detail

/// Flow solutions at each requested horizon (strictly increasing, all > 0)
/// from one continued integration.
inline std::vector<FlowSolution> solve_flow_captures(const SystemModel& model,
                                                     const Vec& xi0,
                                                     const std::vector<double>& times,
                                                     const IntegratorConfig& cfg) {
  if (times.empty()) throw InvalidInputError("solve_flow: no capture times");
  double prev = 0.0;
  for (double t : times) {
    if (!(t > prev)) throw InvalidInputError("solve_flow: capture times must be increasing and > 0");
    prev = t;
  }
  if (!(times.back() <= model.t_end))
    throw InvalidInputError("solve_flow: horizon beyond the model time domain");
  if (xi0.size() != model.n) throw InvalidInputError("solve_flow: xi0 dimension mismatch");
  if (!is_finite(xi0)) throw InvalidInputError("solve_flow: non-finite xi0");
  cfg.validate(times.back());

  detail::FlowIntegrator integ(model, cfg, /*full=*/true);
  detail::AugState y = integ.initial(xi0);
  std::vector<FlowSolution> out;
  out.reserve(times.size());
  double t0 = 0.0;
  for (double t : times) {
    integ.advance(y, t0, t);
    out.push_back(integ.finalize(xi0, t, y));
    t0 = t;
  }
  return out;
}

inline FlowSolution solve_flow(const SystemModel& model, const Vec& xi0, double t,
                               const IntegratorConfig& cfg = {}) {
  return solve_flow_captures(model, xi0, {t}, cfg).front();
}

/// Position and Jacobian only; skips the inverse and quadrature equations
/// for FTLE-only scans.
inline FlowSolution flow_map_only(const SystemModel& model, const Vec& xi0, double t,
                                  const IntegratorConfig& cfg = {}) {
  if (!(t > 0.0)) throw InvalidInputError("flow_map_only: t must be > 0");
  if (!(t <= model.t_end))
    throw InvalidInputError("flow_map_only: horizon beyond the model time domain");
  if (xi0.size() != model.n) throw InvalidInputError("flow_map_only: xi0 dimension mismatch");
  cfg.validate(t);
  detail::FlowIntegrator integ(model, cfg, /*full=*/false);
  detail::AugState y = integ.initial(xi0);
  integ.advance(y, 0.0, t);
  return integ.finalize(xi0, t, std::move(y));
}

}  // namespace sniftle
