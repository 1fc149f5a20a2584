/**
 * @file matops.hpp
 * @brief Operator norm, symmetric eigendecomposition, Cholesky, inversion.
 *
 * The eigensolver is a cyclic Jacobi sweep; everything else is built on it
 * or on textbook elimination. Dimensions here are tiny, so robustness and
 * determinism win over asymptotics.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "sniftle/errors.hpp"
#include "sniftle/matrix.hpp"

namespace sniftle {

struct SymEig {
  Vec values;  // sorted descending
  Mat vectors; // column i is the eigenvector for values[i]
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
/// Stops when the off-diagonal Frobenius mass drops below 1e-14·‖A‖_F;
/// caps at 100 sweeps.
inline SymEig sym_eig(const Mat& a_in) {
  if (!is_finite(a_in)) throw InvalidInputError("sym_eig: non-finite entries");
  const std::size_t n = a_in.dim();
  Mat a = symmetrize(a_in);
  Mat v = Mat::identity(n);
  const double stop = 1e-14 * std::max(frobenius_norm(a), 1e-300);

  auto off_norm = [&]() {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) s += 2.0 * a(i, j) * a(i, j);
    return std::sqrt(s);
  };

  int sweep = 0;
  for (; sweep < 100 && off_norm() > stop; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  if (off_norm() > stop && sweep >= 100)
    throw NumericError("sym_eig: Jacobi sweeps did not converge");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

  SymEig out;
  out.values.resize(n);
  out.vectors = Mat(n);
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  return out;
}

/// Largest singular value: sqrt of the top eigenvalue of AᵀA.
inline double operator_norm(const Mat& a) {
  if (!is_finite(a)) throw InvalidInputError("operator_norm: non-finite entries");
  const SymEig e = sym_eig(transpose(a) * a);
  return std::sqrt(std::max(e.values.front(), 0.0));
}

/// Largest eigenvalue of a symmetric PSD matrix; equals its operator norm.
inline double spd_norm(const Mat& a) {
  return std::max(sym_eig(a).values.front(), 0.0);
}

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
/// The input is symmetrized first; a pivot at or below tolerance raises a
/// DecompositionError naming the pivot index.
inline Mat cholesky(const Mat& xi) {
  if (!is_finite(xi)) throw InvalidInputError("cholesky: non-finite entries");
  const std::size_t n = xi.dim();
  const Mat a = symmetrize(xi);
  double max_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, std::abs(a(i, i)));
  const double tol = 1e-12 * std::max(max_diag, 1e-300);

  Mat l(n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (d <= tol)
      throw DecompositionError(
          "cholesky: pivot " + std::to_string(j) + " not positive definite", j);
    l(j, j) = std::sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  return l;
}

namespace detail {

/// Gauss-Jordan with partial pivoting; throws SingularError on a zero pivot.
inline Mat gauss_jordan_inverse(const Mat& a) {
  const std::size_t n = a.dim();
  Mat w = a;
  Mat inv = Mat::identity(n);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(w(r, col)) > std::abs(w(piv, col))) piv = r;
    if (w(piv, col) == 0.0)
      throw SingularError("invert: exactly singular matrix",
                          std::numeric_limits<double>::infinity());
    if (piv != col) {
      for (std::size_t j = 0; j < n; ++j) {
        std::swap(w(piv, j), w(col, j));
        std::swap(inv(piv, j), inv(col, j));
      }
    }
    const double p = w(col, col);
    for (std::size_t j = 0; j < n; ++j) {
      w(col, j) /= p;
      inv(col, j) /= p;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = w(r, col);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        w(r, j) -= f * w(col, j);
        inv(r, j) -= f * inv(col, j);
      }
    }
  }
  return inv;
}

}  // namespace detail

/// Inverse with a 2-norm condition estimate; rejects matrices whose
/// estimated condition exceeds the threshold (default 1e12).
inline Mat invert(const Mat& a, double cond_threshold = 1e12) {
  if (!is_finite(a)) throw InvalidInputError("invert: non-finite entries");
  Mat inv = detail::gauss_jordan_inverse(a);
  const double cond = operator_norm(a) * operator_norm(inv);
  if (!(cond < cond_threshold))
    throw SingularError("invert: condition estimate " + std::to_string(cond) +
                            " exceeds threshold",
                        cond);
  return inv;
}

inline double determinant(const Mat& a) {
  const std::size_t n = a.dim();
  Mat w = a;
  double det = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(w(r, col)) > std::abs(w(piv, col))) piv = r;
    if (w(piv, col) == 0.0) return 0.0;
    if (piv != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(w(piv, j), w(col, j));
      det = -det;
    }
    det *= w(col, col);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = w(r, col) / w(col, col);
      for (std::size_t j = col; j < n; ++j) w(r, j) -= f * w(col, j);
    }
  }
  return det;
}

/// Symmetric matrix wrapper validated as positive (semi)definite on entry.
/// Symmetry tolerance 1e-12 relative; the stored matrix is symmetrized.
class SpdMat {
 public:
  explicit SpdMat(const Mat& m, bool semidefinite = false) {
    if (!is_finite(m)) throw InvalidInputError("SpdMat: non-finite entries");
    const double scale = std::max(max_abs(m), 1e-300);
    const std::size_t n = m.dim();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (std::abs(m(i, j) - m(j, i)) > 1e-12 * scale)
          throw InvalidInputError("SpdMat: matrix not symmetric at (" +
                                  std::to_string(i) + "," + std::to_string(j) + ")");
    m_ = symmetrize(m);
    const SymEig e = sym_eig(m_);
    const double floor = semidefinite ? -1e-12 * std::abs(e.values.front()) : 0.0;
    for (double lam : e.values) {
      if (semidefinite ? lam < floor : lam <= 0.0)
        throw InvalidInputError("SpdMat: eigenvalue " + std::to_string(lam) +
                                " violates positive definiteness");
    }
  }

  const Mat& mat() const { return m_; }
  std::size_t dim() const { return m_.dim(); }

 private:
  Mat m_;
};

/// Clamp small negative eigenvalues (roundoff) of a symmetric matrix to 0.
/// Eigenvalues below -tol raise a NumericError: that is integration failure,
/// not roundoff.
inline Mat clamp_psd(const Mat& a, double tol = 1e-10) {
  SymEig e = sym_eig(a);
  const double scaled_tol = tol * std::max(1.0, std::abs(e.values.front()));
  bool changed = false;
  for (double& lam : e.values) {
    if (lam < -scaled_tol)
      throw NumericError("clamp_psd: eigenvalue " + std::to_string(lam) +
                         " below the roundoff band");
    if (lam < 0.0) {
      lam = 0.0;
      changed = true;
    }
  }
  if (!changed) return symmetrize(a);
  const std::size_t n = a.dim();
  Mat out(n);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        out(i, j) += e.values[k] * e.vectors(i, k) * e.vectors(j, k);
  return symmetrize(out);
}

}  // namespace sniftle
