/**
 * @file gridded.hpp
 * @brief Velocity fields given as samples on a rectilinear space-time grid.
 *
 * Interpolation is multilinear: linear per space axis and linear in time
 * between the two bracketing snapshots. The gradient returned is the exact
 * derivative of the interpolant (piecewise constant per cell along the
 * differentiated axis), so integrated trajectories and variational
 * equations see a consistent field.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "sniftle/errors.hpp"
#include "sniftle/flowfield.hpp"
#include "sniftle/matrix.hpp"

namespace sniftle {

enum class OutOfDomain { kError, kClamp };

struct GriddedField {
  std::vector<Vec> axes;   // per space dimension, strictly increasing
  Vec times;               // strictly increasing
  // velocity[((ti * nspace) + flat_space) * n + component]
  std::vector<double> velocity;
  // optional diffusion, same node layout with n*n entries per node
  std::vector<double> diffusion;

  std::size_t dim() const { return axes.size(); }
  std::size_t space_nodes() const {
    std::size_t p = 1;
    for (const Vec& ax : axes) p *= ax.size();
    return p;
  }

  void validate() const {
    auto strictly_increasing = [](const Vec& v) {
      if (v.size() < 2) return v.size() == 1;
      for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] > v[i - 1])) return false;
      return true;
    };
    if (axes.empty()) throw InvalidInputError("GriddedField: no space axes");
    for (const Vec& ax : axes)
      if (ax.size() < 2 || !strictly_increasing(ax))
        throw InvalidInputError("GriddedField: axes must be strictly increasing with >= 2 points");
    if (times.size() < 1 || !strictly_increasing(times))
      throw InvalidInputError("GriddedField: time axis must be strictly increasing");
    const std::size_t expected = times.size() * space_nodes() * dim();
    if (velocity.size() != expected)
      throw InvalidInputError("GriddedField: velocity sample count mismatch");
    if (!diffusion.empty() &&
        diffusion.size() != times.size() * space_nodes() * dim() * dim())
      throw InvalidInputError("GriddedField: diffusion sample count mismatch");
  }
};

namespace detail {

struct AxisLocation {
  std::size_t cell;   // left node index
  double frac;        // in [0, 1]
  double inv_width;
};

inline AxisLocation locate(const Vec& ax, double x, OutOfDomain policy,
                           const char* what, double t_for_error) {
  if (x < ax.front() || x > ax.back()) {
    if (policy == OutOfDomain::kError)
      throw DomainError(std::string(what) + ": coordinate " + std::to_string(x) +
                            " outside grid [" + std::to_string(ax.front()) + ", " +
                            std::to_string(ax.back()) + "]",
                        t_for_error);
    x = std::clamp(x, ax.front(), ax.back());
  }
  auto it = std::upper_bound(ax.begin(), ax.end(), x);
  std::size_t cell = (it == ax.begin()) ? 0 : std::size_t(it - ax.begin()) - 1;
  cell = std::min(cell, ax.size() - 2);
  const double w = ax[cell + 1] - ax[cell];
  return {cell, (x - ax[cell]) / w, 1.0 / w};
}

}  // namespace detail

/// Wraps a GriddedField into a SystemModel. Default out-of-domain policy is
/// error; clamping is opt-in. Diffusion defaults to identity when no
/// diffusion samples are present.
inline SystemModel model_from_grid(GriddedField data,
                                   OutOfDomain policy = OutOfDomain::kError) {
  data.validate();
  const std::size_t n = data.dim();
  auto grid = std::make_shared<const GriddedField>(std::move(data));

  // strides over the flattened space index, row-major over axes
  std::vector<std::size_t> strides(n, 1);
  for (std::size_t d = n; d-- > 1;)
    strides[d - 1] = strides[d] * grid->axes[d].size();

  // Evaluates component values and, when grad != nullptr, the interpolant's
  // spatial gradient, at one time slice.
  auto eval_slice = [grid, strides, n, policy](
                        std::size_t ti, const Vec& x, double t, Vec* val, Mat* grad) {
    std::vector<detail::AxisLocation> loc(n);
    for (std::size_t d = 0; d < n; ++d)
      loc[d] = detail::locate(grid->axes[d], x[d], policy, "gridded velocity", t);
    const std::size_t nspace = grid->space_nodes();
    const std::size_t corners = std::size_t{1} << n;
    if (val) val->assign(n, 0.0);
    if (grad) *grad = Mat::zero(n);
    for (std::size_t c = 0; c < corners; ++c) {
      double w = 1.0;
      std::size_t flat = 0;
      for (std::size_t d = 0; d < n; ++d) {
        const bool hi = (c >> d) & 1u;
        w *= hi ? loc[d].frac : 1.0 - loc[d].frac;
        flat += (loc[d].cell + (hi ? 1 : 0)) * strides[d];
      }
      const double* u = &grid->velocity[(ti * nspace + flat) * n];
      if (val && w != 0.0)
        for (std::size_t i = 0; i < n; ++i) (*val)[i] += w * u[i];
      if (grad) {
        for (std::size_t j = 0; j < n; ++j) {
          double dw = 1.0;
          for (std::size_t d = 0; d < n; ++d) {
            const bool hi = (c >> d) & 1u;
            if (d == j)
              dw *= (hi ? 1.0 : -1.0) * loc[d].inv_width;
            else
              dw *= hi ? loc[d].frac : 1.0 - loc[d].frac;
          }
          if (dw != 0.0)
            for (std::size_t i = 0; i < n; ++i) (*grad)(i, j) += dw * u[i];
        }
      }
    }
  };

  auto eval = [grid, eval_slice, policy](const Vec& x, double t, Vec* val, Mat* grad) {
    if (x.size() != grid->dim())
      throw InvalidInputError("gridded velocity: dimension mismatch");
    const Vec& ts = grid->times;
    const std::size_t n = grid->dim();
    if (ts.size() == 1) {
      eval_slice(0, x, t, val, grad);
      return;
    }
    double tq = t;
    if (tq < ts.front() || tq > ts.back()) {
      if (policy == OutOfDomain::kError)
        throw DomainError("gridded velocity: time " + std::to_string(t) +
                              " outside grid",
                          t);
      tq = std::clamp(tq, ts.front(), ts.back());
    }
    auto it = std::upper_bound(ts.begin(), ts.end(), tq);
    std::size_t k = (it == ts.begin()) ? 0 : std::size_t(it - ts.begin()) - 1;
    k = std::min(k, ts.size() - 2);
    const double a = (tq - ts[k]) / (ts[k + 1] - ts[k]);
    Vec v0, v1;
    Mat g0, g1;
    eval_slice(k, x, t, val ? &v0 : nullptr, grad ? &g0 : nullptr);
    eval_slice(k + 1, x, t, val ? &v1 : nullptr, grad ? &g1 : nullptr);
    if (val) {
      val->resize(n);
      for (std::size_t i = 0; i < n; ++i) (*val)[i] = (1.0 - a) * v0[i] + a * v1[i];
    }
    if (grad) *grad = (1.0 - a) * g0 + a * g1;
  };

  SystemModel m;
  m.n = n;
  m.t_end = grid->times.back();
  m.name = "gridded";
  m.velocity = [eval, n](const Vec& x, double t) {
    Vec v(n);
    eval(x, t, &v, nullptr);
    return v;
  };
  m.velocity_gradient = [eval, n](const Vec& x, double t) {
    Mat g(n);
    eval(x, t, nullptr, &g);
    return g;
  };
  if (grid->diffusion.empty()) {
    m.diffusion = [n](const Vec&, double) { return Mat::identity(n); };
  } else {
    // nearest-node diffusion lookup; σ varies slowly in the intended use
    m.diffusion = [grid, strides, n, policy](const Vec& x, double t) {
      std::size_t flat = 0;
      for (std::size_t d = 0; d < n; ++d) {
        const auto loc = detail::locate(grid->axes[d], x[d], policy, "gridded diffusion", t);
        flat += (loc.cell + (loc.frac > 0.5 ? 1 : 0)) * strides[d];
      }
      const Vec& ts = grid->times;
      std::size_t ti = 0;
      if (ts.size() > 1) {
        auto it = std::lower_bound(ts.begin(), ts.end(), t);
        ti = (it == ts.end()) ? ts.size() - 1 : std::size_t(it - ts.begin());
      }
      Mat s(n);
      const double* p = &grid->diffusion[(ti * grid->space_nodes() + flat) * n * n];
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) s(i, j) = p[i * n + j];
      return s;
    };
  }
  return m;
}

/// Loads the delimited-text format: one header line naming columns
/// t x1..xn u1..un (whitespace or comma separated), then one row per
/// space-time node. Rows may come in any order but must fill a complete
/// tensor grid.
inline GriddedField load_gridded_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open gridded data file", path);

  auto split = [](const std::string& line) {
    std::vector<std::string> out;
    std::string tok;
    for (char c : line) {
      if (c == ',' || c == ' ' || c == '\t') {
        if (!tok.empty()) out.push_back(tok);
        tok.clear();
      } else {
        tok += c;
      }
    }
    if (!tok.empty()) out.push_back(tok);
    return out;
  };

  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty gridded data file", path);
  const auto header = split(line);
  if (header.empty() || header[0] != "t")
    throw ConfigError("gridded header must start with column 't'", path);
  std::size_t n = 0;
  while (1 + n < header.size() && header[1 + n] == "x" + std::to_string(n + 1)) ++n;
  if (n == 0 || header.size() != 1 + 2 * n)
    throw ConfigError("gridded header must be: t x1..xn u1..un", path);
  for (std::size_t i = 0; i < n; ++i)
    if (header[1 + n + i] != "u" + std::to_string(i + 1))
      throw ConfigError("gridded header must be: t x1..xn u1..un", path);

  struct Row {
    double t;
    Vec x;
    Vec u;
  };
  std::vector<Row> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const auto toks = split(line);
    if (toks.empty()) continue;
    if (toks.size() != 1 + 2 * n)
      throw ConfigError("expected " + std::to_string(1 + 2 * n) + " columns",
                        path + ":" + std::to_string(lineno));
    Row r;
    try {
      r.t = std::stod(toks[0]);
      for (std::size_t i = 0; i < n; ++i) r.x.push_back(std::stod(toks[1 + i]));
      for (std::size_t i = 0; i < n; ++i) r.u.push_back(std::stod(toks[1 + n + i]));
    } catch (const std::exception&) {
      throw ConfigError("malformed number", path + ":" + std::to_string(lineno));
    }
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw ConfigError("no data rows", path);

  GriddedField g;
  std::map<double, std::size_t> tmap;
  std::vector<std::map<double, std::size_t>> xmaps(n);
  for (const Row& r : rows) {
    tmap.emplace(r.t, 0);
    for (std::size_t d = 0; d < n; ++d) xmaps[d].emplace(r.x[d], 0);
  }
  g.times.reserve(tmap.size());
  for (auto& [t, idx] : tmap) {
    idx = g.times.size();
    g.times.push_back(t);
  }
  g.axes.resize(n);
  for (std::size_t d = 0; d < n; ++d) {
    for (auto& [x, idx] : xmaps[d]) {
      idx = g.axes[d].size();
      g.axes[d].push_back(x);
    }
  }
  const std::size_t nspace = g.space_nodes();
  if (rows.size() != g.times.size() * nspace)
    throw ConfigError("rows do not form a complete tensor grid (" +
                          std::to_string(rows.size()) + " rows, expected " +
                          std::to_string(g.times.size() * nspace) + ")",
                      path);
  std::vector<std::size_t> strides(n, 1);
  for (std::size_t d = n; d-- > 1;) strides[d - 1] = strides[d] * g.axes[d].size();

  g.velocity.assign(g.times.size() * nspace * n,
                    std::numeric_limits<double>::quiet_NaN());
  for (const Row& r : rows) {
    std::size_t flat = 0;
    for (std::size_t d = 0; d < n; ++d) flat += xmaps[d].at(r.x[d]) * strides[d];
    const std::size_t base = (tmap.at(r.t) * nspace + flat) * n;
    for (std::size_t i = 0; i < n; ++i) g.velocity[base + i] = r.u[i];
  }
  for (double v : g.velocity)
    if (std::isnan(v)) throw ConfigError("duplicate or missing grid nodes", path);
  try {
    g.validate();
  } catch (const InvalidInputError& e) {
    throw ConfigError(e.what(), path);
  }
  return g;
}

}  // namespace sniftle
