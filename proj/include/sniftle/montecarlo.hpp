/**
 * @file montecarlo.hpp
 * @brief Euler-Maruyama simulation of the full SDE and its linearization
 *        under shared noise realizations, plus the derived estimators.
 *
 * For each sample the initial condition ξ = ξ₀ + δ Ψ₀ z (z standard normal)
 * and one Wiener increment sequence are drawn once and used for both the
 * full system
 *     dx = u(x, τ) dτ + ε σ(x, τ) dW
 * and the linearization about the deterministic path F₀ᵗ(ξ₀)
 *     dl = [u(F, τ) + ∇u(F, τ)(l − F)] dτ + ε σ(F, τ) dW.
 * The center path and its gradient are precomputed once on the
 * Euler-Maruyama grid and shared read-only across samples.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <mutex>
#include <thread>
#include <utility>
#include <vector>

#include "sniftle/covariance.hpp"
#include "sniftle/errors.hpp"
#include "sniftle/flowmap.hpp"
#include "sniftle/matops.hpp"
#include "sniftle/matrix.hpp"
#include "sniftle/rng.hpp"

namespace sniftle {

enum class DomainExitPolicy { kAbort, kSkipAndCount };

struct McConfig {
  std::size_t samples;
  double em_step;
  std::uint64_t seed;
  UncertaintyScales scales;
  DomainExitPolicy domain_exit = DomainExitPolicy::kAbort;
  std::size_t workers = 1;

  void validate() const {
    if (samples < 2) throw InvalidInputError("McConfig: need at least 2 samples");
    if (!(em_step > 0.0)) throw InvalidInputError("McConfig: em_step must be > 0");
  }
};

struct Ensemble {
  std::size_t n = 0;
  std::vector<double> final_states;  // row i = sample i (skipped rows are NaN)
  std::vector<std::uint8_t> skipped; // per-sample skip flag
  std::size_t skipped_count = 0;
  Vec mean;
  Mat covariance;                       // unbiased, divisor N-1
  std::map<int, double> moment_table;   // r -> (1/N) Σ ‖sample - mean‖^r

  std::size_t size() const { return skipped.size(); }
  Vec sample(std::size_t i) const {
    return Vec(final_states.begin() + i * n, final_states.begin() + (i + 1) * n);
  }

  void finalize(const std::vector<int>& r_orders) {
    const std::size_t total = size();
    const std::size_t kept = total - skipped_count;
    if (kept < 2) throw EstimationError("Ensemble: fewer than 2 usable samples");
    mean.assign(n, 0.0);
    for (std::size_t i = 0; i < total; ++i) {
      if (skipped[i]) continue;
      for (std::size_t j = 0; j < n; ++j) mean[j] += final_states[i * n + j];
    }
    for (double& m : mean) m /= double(kept);
    covariance = Mat::zero(n);
    for (std::size_t i = 0; i < total; ++i) {
      if (skipped[i]) continue;
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b)
          covariance(a, b) += (final_states[i * n + a] - mean[a]) *
                              (final_states[i * n + b] - mean[b]);
    }
    covariance *= 1.0 / double(kept - 1);
    for (int r : r_orders) {
      double acc = 0.0;
      for (std::size_t i = 0; i < total; ++i) {
        if (skipped[i]) continue;
        double d2 = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          const double dj = final_states[i * n + j] - mean[j];
          d2 += dj * dj;
        }
        acc += std::pow(std::sqrt(d2), double(r));
      }
      moment_table[r] = acc / double(kept);
    }
  }
};

namespace detail {

/// Deterministic center path F₀^τ(ξ₀) with u, ∇u, σ on the EM grid,
/// advanced by RK4 at the EM step.
struct CenterPath {
  std::vector<Vec> position;  // nodes 0..nsteps
  std::vector<Vec> drift;     // u(F_k, t_k), nodes 0..nsteps-1
  std::vector<Mat> gradient;  // ∇u(F_k, t_k)
  std::vector<Mat> sigma;     // σ(F_k, t_k)
};

inline CenterPath precompute_center_path(const SystemModel& model, const Vec& xi0,
                                         std::size_t nsteps, double h) {
  CenterPath cp;
  cp.position.reserve(nsteps + 1);
  Vec x = xi0;
  cp.position.push_back(x);
  for (std::size_t k = 0; k < nsteps; ++k) {
    const double tk = double(k) * h;
    cp.drift.push_back(model.u(x, tk));
    cp.gradient.push_back(model.grad_u(x, tk));
    cp.sigma.push_back(model.sigma(x, tk));
    const Vec k1 = model.u(x, tk);
    const Vec k2 = model.u(x + (0.5 * h) * k1, tk + 0.5 * h);
    const Vec k3 = model.u(x + (0.5 * h) * k2, tk + 0.5 * h);
    const Vec k4 = model.u(x + h * k3, tk + h);
    for (std::size_t j = 0; j < x.size(); ++j)
      x[j] += (h / 6.0) * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    cp.position.push_back(x);
  }
  return cp;
}

}  // namespace detail

/// Simulates N coupled (x, l) sample pairs to horizon t. Returns the x and
/// l ensembles; statistics are reduced serially in sample order, so the
/// result is independent of cfg.workers.
inline std::pair<Ensemble, Ensemble> simulate_pair(const SystemModel& model,
                                                   const Vec& xi0, double t,
                                                   const McConfig& cfg,
                                                   const std::vector<int>& r_orders = {}) {
  cfg.validate();
  if (!(t > 0.0) || !(t <= model.t_end))
    throw InvalidInputError("simulate_pair: horizon outside (0, T]");
  const std::size_t n = model.n;
  const std::size_t nsteps =
      std::max<std::size_t>(1, std::size_t(std::llround(t / cfg.em_step)));
  const double h = t / double(nsteps);
  const double sqrth = std::sqrt(h);

  const auto cp = detail::precompute_center_path(model, xi0, nsteps, h);
  const Mat psi = cholesky(cfg.scales.xi_cov.mat());
  const double eps = cfg.scales.eps;
  const double delta = cfg.scales.delta;

  Ensemble ex, el;
  ex.n = el.n = n;
  ex.final_states.assign(cfg.samples * n, 0.0);
  el.final_states.assign(cfg.samples * n, 0.0);
  ex.skipped.assign(cfg.samples, 0);
  el.skipped.assign(cfg.samples, 0);

  auto run_sample = [&](std::size_t i) {
    SubstreamRng rng(cfg.seed, i);
    Vec z(n);
    for (double& v : z) v = rng.next_normal();
    Vec xi = xi0 + delta * (psi * z);
    Vec x = xi, l = xi;
    Vec dw(n);
    try {
      for (std::size_t k = 0; k < nsteps; ++k) {
        const double tk = double(k) * h;
        for (double& v : dw) v = sqrth * rng.next_normal();
        const Vec ux = model.u(x, tk);
        Vec x_noise(n, 0.0);
        if (eps != 0.0) x_noise = model.sigma(x, tk) * dw;
        // linearized drift about the precomputed center path
        const Vec& f = cp.position[k];
        Vec ul = cp.drift[k] + cp.gradient[k] * (l - f);
        Vec l_noise(n, 0.0);
        if (eps != 0.0) l_noise = cp.sigma[k] * dw;
        for (std::size_t j = 0; j < n; ++j) {
          x[j] += h * ux[j] + eps * x_noise[j];
          l[j] += h * ul[j] + eps * l_noise[j];
        }
      }
    } catch (const DomainError&) {
      if (cfg.domain_exit == DomainExitPolicy::kAbort) throw;
      ex.skipped[i] = el.skipped[i] = 1;
      for (std::size_t j = 0; j < n; ++j) {
        ex.final_states[i * n + j] = std::numeric_limits<double>::quiet_NaN();
        el.final_states[i * n + j] = std::numeric_limits<double>::quiet_NaN();
      }
      return;
    }
    for (std::size_t j = 0; j < n; ++j) {
      ex.final_states[i * n + j] = x[j];
      el.final_states[i * n + j] = l[j];
    }
  };

  const std::size_t workers = std::max<std::size_t>(1, cfg.workers);
  if (workers == 1) {
    for (std::size_t i = 0; i < cfg.samples; ++i) run_sample(i);
  } else {
    std::vector<std::thread> pool;
    std::exception_ptr first_error;
    std::mutex err_mu;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < cfg.samples; i += workers) run_sample(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mu);
          if (!first_error) first_error = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  for (std::size_t i = 0; i < cfg.samples; ++i)
    if (ex.skipped[i]) ++ex.skipped_count, ++el.skipped_count;
  ex.finalize(r_orders);
  el.finalize(r_orders);
  return {std::move(ex), std::move(el)};
}

/// Exact supremum over unit projections p of Var[pᵀ(sample − center)/scale]
/// for the empirical measure: the top eigenvalue of the scaled empirical
/// covariance.
inline double projection_variance_sup(const Ensemble& ens, const Vec& center,
                                      double scale) {
  (void)center;  // variances are translation invariant
  if (!(scale > 0.0)) throw InvalidInputError("projection_variance_sup: scale must be > 0");
  if (ens.size() - ens.skipped_count < 2)
    throw EstimationError("projection_variance_sup: degenerate ensemble");
  return spd_norm(ens.covariance) / (scale * scale);
}

enum class ScalingAxis { kEpsOnly, kDeltaOnly };

struct ScalingRow {
  double scale;
  int r;
  double moment;  // (1/N) Σ ‖x_t − l_t‖^r
  double stderr_;
};

struct SlopeFit {
  double slope = 0.0;
  double residual = 0.0;  // RMS of log-log fit residuals
  bool monotone = true;   // false flags an inconclusive (noisy) sequence
};

struct ScalingStudy {
  std::vector<ScalingRow> rows;
  std::map<int, SlopeFit> slopes;  // per moment order r
  bool degenerate = false;         // all moments at integrator-noise level
};

/// Sweeps ε (with δ = 0) or δ (with ε = 0) over the given levels and fits
/// the log-log slope of E‖x_t − l_t‖^r per order r. The same seed is used
/// at every level, so realizations are shared across the sweep.
inline ScalingStudy bound_scaling_study(const SystemModel& model, const Vec& xi0,
                                        double t, ScalingAxis axis,
                                        const std::vector<double>& levels,
                                        const std::vector<int>& r_orders,
                                        const McConfig& base_cfg) {
  if (levels.size() < 4)
    throw InvalidInputError("bound_scaling_study: insufficient levels (need >= 4)");
  const auto [lo, hi] = std::minmax_element(levels.begin(), levels.end());
  if (!(*lo > 0.0) || std::log10(*hi / *lo) < 1.5)
    throw InvalidInputError("bound_scaling_study: levels must span >= 1.5 decades");
  for (int r : r_orders)
    if (r < 1) throw InvalidInputError("bound_scaling_study: moment orders must be >= 1");

  ScalingStudy study;
  std::map<int, std::vector<std::pair<double, double>>> series;  // r -> (scale, moment)
  for (double s : levels) {
    McConfig cfg = base_cfg;
    UncertaintyScales scales(axis == ScalingAxis::kEpsOnly ? s : 0.0,
                             axis == ScalingAxis::kDeltaOnly ? s : 0.0,
                             base_cfg.scales.xi_cov);
    cfg.scales = scales;
    const auto [ex, el] = simulate_pair(model, xi0, t, cfg);
    const std::size_t total = ex.size();
    std::vector<double> dist;
    dist.reserve(total);
    for (std::size_t i = 0; i < total; ++i) {
      if (ex.skipped[i]) continue;
      dist.push_back(norm(ex.sample(i) - el.sample(i)));
    }
    for (int r : r_orders) {
      double m = 0.0, m2 = 0.0;
      for (double d : dist) {
        const double dr = std::pow(d, double(r));
        m += dr;
        m2 += dr * dr;
      }
      const double cnt = double(dist.size());
      m /= cnt;
      const double var = std::max(0.0, m2 / cnt - m * m);
      study.rows.push_back({s, r, m, std::sqrt(var / cnt)});
      series[r].emplace_back(s, m);
    }
  }

  study.degenerate = true;
  for (const auto& row : study.rows)
    if (row.moment > 1e-12) study.degenerate = false;

  for (auto& [r, pts] : series) {
    SlopeFit fit;
    if (study.degenerate) {
      study.slopes[r] = fit;
      continue;
    }
    std::sort(pts.begin(), pts.end());
    for (std::size_t i = 1; i < pts.size(); ++i)
      if (pts[i].second < pts[i - 1].second) fit.monotone = false;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [s, m] : pts) {
      const double lx = std::log(s), ly = std::log(std::max(m, 1e-300));
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
    }
    const double np = double(pts.size());
    fit.slope = (np * sxy - sx * sy) / (np * sxx - sx * sx);
    const double intercept = (sy - fit.slope * sx) / np;
    double ss = 0.0;
    for (const auto& [s, m] : pts) {
      const double e = std::log(std::max(m, 1e-300)) -
                       (intercept + fit.slope * std::log(s));
      ss += e * e;
    }
    fit.residual = std::sqrt(ss / np);
    study.slopes[r] = fit;
  }
  return study;
}

struct GaussianValidationReport {
  double cov_rel_error = 0.0;   // Frobenius-relative
  double mean_abs_error = 0.0;  // Euclidean distance of means
  double skipped_fraction = 0.0;
};

/// Compares the empirical mean/covariance of the simulated x ensemble
/// against the Gaussian prediction of the linearization.
inline GaussianValidationReport gaussian_validation(const SystemModel& model,
                                                    const Vec& xi0, double t,
                                                    const McConfig& cfg,
                                                    const IntegratorConfig& icfg = {}) {
  const auto [ex, el] = simulate_pair(model, xi0, t, cfg);
  const FlowSolution sol = solve_flow(model, xi0, t, icfg);
  const auto [mean, cov] = gaussian_predictive(sol, cfg.scales);
  GaussianValidationReport rep;
  rep.mean_abs_error = norm(ex.mean - mean);
  const double denom = std::max(frobenius_norm(cov), 1e-300);
  rep.cov_rel_error = frobenius_norm(ex.covariance - cov) / denom;
  rep.skipped_fraction = double(ex.skipped_count) / double(ex.size());
  return rep;
}

}  // namespace sniftle
