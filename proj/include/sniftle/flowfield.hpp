/**
 * @file flowfield.hpp
 * @brief System models (u, σ): analytic built-ins and evaluation contracts.
 *
 * A SystemModel bundles the drift u(x,t), its spatial gradient, and the
 * diffusion matrix σ(x,t) for an n-dimensional system on a time domain
 * [0, T]. Evaluation is read-only and thread-safe.
 */
#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sniftle/errors.hpp"
#include "sniftle/matops.hpp"
#include "sniftle/matrix.hpp"

namespace sniftle {

struct SystemModel {
  std::size_t n = 0;
  double t_end = std::numeric_limits<double>::infinity();
  std::function<Vec(const Vec&, double)> velocity;
  std::function<Mat(const Vec&, double)> velocity_gradient;
  std::function<Mat(const Vec&, double)> diffusion;
  std::string name;

  Vec u(const Vec& x, double t) const { return velocity(x, t); }
  Mat grad_u(const Vec& x, double t) const { return velocity_gradient(x, t); }
  Mat sigma(const Vec& x, double t) const { return diffusion(x, t); }
};

// ---------------------------------------------------------------------------
// Diffusion specifications

struct DiffusionSpec {
  static DiffusionSpec identity() { return {Kind::kIdentity, 1.0, nullptr}; }
  static DiffusionSpec constant(double sigma0) {
    if (!std::isfinite(sigma0)) throw InvalidInputError("DiffusionSpec: non-finite scale");
    return {Kind::kConstant, sigma0, nullptr};
  }
  static DiffusionSpec state_dependent(std::function<Mat(const Vec&, double)> fn) {
    return {Kind::kCallable, 0.0, std::move(fn)};
  }

  std::function<Mat(const Vec&, double)> bind(std::size_t n) const {
    switch (kind) {
      case Kind::kIdentity:
        return [n](const Vec&, double) { return Mat::identity(n); };
      case Kind::kConstant: {
        const double s = scale;
        return [n, s](const Vec&, double) { return s * Mat::identity(n); };
      }
      case Kind::kCallable:
        return callable;
    }
    throw ConfigError("DiffusionSpec: unknown kind");
  }

  enum class Kind { kIdentity, kConstant, kCallable };
  Kind kind;
  double scale;
  std::function<Mat(const Vec&, double)> callable;
};

// ---------------------------------------------------------------------------
// Built-in analytic models (test fixtures and the double-gyre benchmark)

inline SystemModel make_zero_model(std::size_t n = 2,
                                   DiffusionSpec diff = DiffusionSpec::identity()) {
  SystemModel m;
  m.n = n;
  m.name = "zero";
  m.velocity = [n](const Vec&, double) { return Vec(n, 0.0); };
  m.velocity_gradient = [n](const Vec&, double) { return Mat::zero(n); };
  m.diffusion = diff.bind(n);
  return m;
}

/// u(x) = (a·x₁, −a·x₂); divergence-free linear saddle.
inline SystemModel make_linear_saddle(double a,
                                      DiffusionSpec diff = DiffusionSpec::identity()) {
  if (!std::isfinite(a)) throw InvalidInputError("linear_saddle: non-finite rate");
  SystemModel m;
  m.n = 2;
  m.name = "linear_saddle";
  m.velocity = [a](const Vec& x, double) { return Vec{a * x[0], -a * x[1]}; };
  m.velocity_gradient = [a](const Vec&, double) {
    return Mat(2, {a, 0.0, 0.0, -a});
  };
  m.diffusion = diff.bind(2);
  return m;
}

/// u(x) = (−ω·x₂, ω·x₁); rigid rotation, orthogonal flow-map Jacobian.
inline SystemModel make_rigid_rotation(double omega,
                                       DiffusionSpec diff = DiffusionSpec::identity()) {
  if (!std::isfinite(omega)) throw InvalidInputError("rigid_rotation: non-finite rate");
  SystemModel m;
  m.n = 2;
  m.name = "rigid_rotation";
  m.velocity = [omega](const Vec& x, double) {
    return Vec{-omega * x[1], omega * x[0]};
  };
  m.velocity_gradient = [omega](const Vec&, double) {
    return Mat(2, {0.0, -omega, omega, 0.0});
  };
  m.diffusion = diff.bind(2);
  return m;
}

/// The periodically perturbed double gyre on [0,2]×[0,1], from the stream
/// function ψ = A sin(π f(x,t)) sin(π y) with
/// f(x,t) = e sin(ωt) x² + (1 − 2 e sin(ωt)) x.
inline SystemModel make_double_gyre(double amplitude = 0.1, double e = 0.1,
                                    double omega = std::numbers::pi / 5.0,
                                    DiffusionSpec diff = DiffusionSpec::identity()) {
  if (!std::isfinite(amplitude) || !std::isfinite(e) || !std::isfinite(omega))
    throw InvalidInputError("double_gyre: non-finite parameter");
  SystemModel m;
  m.n = 2;
  m.name = "double_gyre";
  const double pi = std::numbers::pi;
  m.velocity = [=](const Vec& x, double t) {
    const double es = e * std::sin(omega * t);
    const double f = es * x[0] * x[0] + (1.0 - 2.0 * es) * x[0];
    const double fx = 2.0 * es * x[0] + 1.0 - 2.0 * es;
    return Vec{-pi * amplitude * std::sin(pi * f) * std::cos(pi * x[1]),
               pi * amplitude * std::cos(pi * f) * std::sin(pi * x[1]) * fx};
  };
  m.velocity_gradient = [=](const Vec& x, double t) {
    const double es = e * std::sin(omega * t);
    const double f = es * x[0] * x[0] + (1.0 - 2.0 * es) * x[0];
    const double fx = 2.0 * es * x[0] + 1.0 - 2.0 * es;
    const double fxx = 2.0 * es;
    const double sf = std::sin(pi * f), cf = std::cos(pi * f);
    const double sy = std::sin(pi * x[1]), cy = std::cos(pi * x[1]);
    Mat g(2);
    g(0, 0) = -pi * pi * amplitude * cf * cy * fx;
    g(0, 1) = pi * pi * amplitude * sf * sy;
    g(1, 0) = pi * amplitude * sy * (-pi * sf * fx * fx + cf * fxx);
    g(1, 1) = pi * pi * amplitude * cf * cy * fx;
    return g;
  };
  m.diffusion = diff.bind(2);
  return m;
}

// ---------------------------------------------------------------------------

/// Max over probes of the max-abs discrepancy between central finite
/// differences of velocity and the model's analytic gradient. Second-order
/// in h; the caller judges the scale.
inline double check_gradient_consistency(const SystemModel& model,
                                         const std::vector<std::pair<Vec, double>>& probes,
                                         double h) {
  if (!(h > 0.0)) throw InvalidInputError("check_gradient_consistency: h must be > 0");
  double worst = 0.0;
  for (const auto& [x, t] : probes) {
    const Mat g = model.grad_u(x, t);
    for (std::size_t j = 0; j < model.n; ++j) {
      Vec xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      const Vec up = model.u(xp, t);
      const Vec um = model.u(xm, t);
      for (std::size_t i = 0; i < model.n; ++i) {
        const double fd = (up[i] - um[i]) / (2.0 * h);
        worst = std::max(worst, std::abs(fd - g(i, j)));
      }
    }
  }
  return worst;
}

}  // namespace sniftle
