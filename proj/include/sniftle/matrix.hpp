/**
 * @file matrix.hpp
 * @brief Small dense square matrices and vectors for state dimension n.
 *
 * Row-major storage in a flat std::vector. Intended for n in the single
 * digits (supported up to ~32); no attempt at cache blocking or BLAS.
 */
#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <vector>

#include "sniftle/errors.hpp"

namespace sniftle {

using Vec = std::vector<double>;

class Mat {
 public:
  Mat() = default;
  explicit Mat(std::size_t n) : n_(n), a_(n * n, 0.0) {}
  Mat(std::size_t n, std::initializer_list<double> entries) : n_(n), a_(entries) {
    if (a_.size() != n * n) throw InvalidInputError("Mat: initializer size mismatch");
  }

  static Mat identity(std::size_t n) {
    Mat m(n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }
  static Mat zero(std::size_t n) { return Mat(n); }
  static Mat diagonal(const Vec& d) {
    Mat m(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
  }

  std::size_t dim() const { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }
  double* data() { return a_.data(); }
  const double* data() const { return a_.data(); }

  Mat& operator+=(const Mat& o) {
    for (std::size_t k = 0; k < a_.size(); ++k) a_[k] += o.a_[k];
    return *this;
  }
  Mat& operator-=(const Mat& o) {
    for (std::size_t k = 0; k < a_.size(); ++k) a_[k] -= o.a_[k];
    return *this;
  }
  Mat& operator*=(double c) {
    for (double& v : a_) v *= c;
    return *this;
  }

 private:
  std::size_t n_ = 0;
  std::vector<double> a_;
};

inline Mat operator+(Mat a, const Mat& b) { return a += b; }
inline Mat operator-(Mat a, const Mat& b) { return a -= b; }
inline Mat operator*(Mat a, double c) { return a *= c; }
inline Mat operator*(double c, Mat a) { return a *= c; }

inline Mat operator*(const Mat& a, const Mat& b) {
  const std::size_t n = a.dim();
  Mat out(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) out(i, j) += aik * b(k, j);
    }
  return out;
}

inline Vec operator*(const Mat& a, const Vec& x) {
  const std::size_t n = a.dim();
  Vec y(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) y[i] += a(i, j) * x[j];
  return y;
}

inline Mat transpose(const Mat& a) {
  const std::size_t n = a.dim();
  Mat t(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) t(j, i) = a(i, j);
  return t;
}

inline double trace(const Mat& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) s += a(i, i);
  return s;
}

inline double frobenius_norm(const Mat& a) {
  double s = 0.0;
  const std::size_t n = a.dim();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

inline double max_abs(const Mat& a) {
  double m = 0.0;
  const std::size_t n = a.dim();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m = std::max(m, std::abs(a(i, j)));
  return m;
}

inline bool is_finite(const Mat& a) {
  const std::size_t n = a.dim();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (!std::isfinite(a(i, j))) return false;
  return true;
}

inline bool is_finite(const Vec& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

inline Mat symmetrize(const Mat& a) {
  const std::size_t n = a.dim();
  Mat s(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) s(i, j) = 0.5 * (a(i, j) + a(j, i));
  return s;
}

/// a * b * aᵀ, symmetrized. The workhorse congruence for covariances.
inline Mat congruence(const Mat& a, const Mat& b) {
  return symmetrize(a * b * transpose(a));
}

inline Vec operator+(Vec a, const Vec& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  return a;
}
inline Vec operator-(Vec a, const Vec& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
  return a;
}
inline Vec operator*(double c, Vec a) {
  for (double& v : a) v *= c;
  return a;
}

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(const Vec& v) { return std::sqrt(dot(v, v)); }

/// wwᵀ for a vector w.
inline Mat outer(const Vec& w) {
  Mat m(w.size());
  for (std::size_t i = 0; i < w.size(); ++i)
    for (std::size_t j = 0; j < w.size(); ++j) m(i, j) = w[i] * w[j];
  return m;
}

}  // namespace sniftle
