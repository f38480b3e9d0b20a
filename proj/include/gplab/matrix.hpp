#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "gplab/errors.hpp"

namespace gplab {

using Vector = std::vector<double>;

// Dense row-major matrix. Everything in this project is desk scale
// (a few hundred on a side), so no fancy storage or views.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0.0) {}

  double& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
  double operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }

  static Matrix identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  Vector col(int j) const {
    Vector v(rows);
    for (int i = 0; i < rows; ++i) v[i] = (*this)(i, j);
    return v;
  }

  void set_col(int j, const Vector& v) {
    for (int i = 0; i < rows; ++i) (*this)(i, j) = v[i];
  }
};

inline Matrix transpose(const Matrix& m) {
  Matrix t(m.cols, m.rows);
  for (int i = 0; i < m.rows; ++i)
    for (int j = 0; j < m.cols; ++j) t(j, i) = m(i, j);
  return t;
}

inline Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows) throw PreconditionError("matmul: shape mismatch");
  Matrix c(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i) {
    for (int k = 0; k < a.cols; ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < b.cols; ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

inline Vector matvec(const Matrix& m, const Vector& x) {
  if (static_cast<int>(x.size()) != m.cols) throw PreconditionError("matvec: shape mismatch");
  Vector y(m.rows, 0.0);
  for (int i = 0; i < m.rows; ++i) {
    double s = 0.0;
    for (int j = 0; j < m.cols; ++j) s += m(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

// m^T x
inline Vector matvec_t(const Matrix& m, const Vector& x) {
  if (static_cast<int>(x.size()) != m.rows) throw PreconditionError("matvec_t: shape mismatch");
  Vector y(m.cols, 0.0);
  for (int i = 0; i < m.rows; ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    for (int j = 0; j < m.cols; ++j) y[j] += m(i, j) * xi;
  }
  return y;
}

inline Matrix operator-(const Matrix& a, const Matrix& b) {
  if (a.rows != b.rows || a.cols != b.cols) throw PreconditionError("matrix -: shape mismatch");
  Matrix c = a;
  for (size_t i = 0; i < c.a.size(); ++i) c.a[i] -= b.a[i];
  return c;
}

inline Matrix operator+(const Matrix& a, const Matrix& b) {
  if (a.rows != b.rows || a.cols != b.cols) throw PreconditionError("matrix +: shape mismatch");
  Matrix c = a;
  for (size_t i = 0; i < c.a.size(); ++i) c.a[i] += b.a[i];
  return c;
}

inline double dot(const Vector& x, const Vector& y) {
  double s = 0.0;
  for (size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

inline double norm2(const Vector& x) { return std::sqrt(dot(x, x)); }

inline double norm1(const Vector& x) {
  double s = 0.0;
  for (double v : x) s += std::fabs(v);
  return s;
}

inline double norm_inf(const Vector& x) {
  double s = 0.0;
  for (double v : x) s = std::max(s, std::fabs(v));
  return s;
}

inline Vector scaled(const Vector& x, double c) {
  Vector y = x;
  for (double& v : y) v *= c;
  return y;
}

inline void axpy(double c, const Vector& x, Vector& y) {
  for (size_t i = 0; i < x.size(); ++i) y[i] += c * x[i];
}

inline Vector vsum(const Vector& x, const Vector& y) {
  Vector z = x;
  axpy(1.0, y, z);
  return z;
}

inline Vector vdiff(const Vector& x, const Vector& y) {
  Vector z = x;
  axpy(-1.0, y, z);
  return z;
}

inline double frobenius_norm(const Matrix& m) {
  double s = 0.0;
  for (double v : m.a) s += v * v;
  return std::sqrt(s);
}

inline double max_abs(const Matrix& m) {
  double s = 0.0;
  for (double v : m.a) s = std::max(s, std::fabs(v));
  return s;
}

// Gaussian elimination with partial pivoting; square systems only.
inline Vector solve_linear(Matrix m, Vector b) {
  const int n = m.rows;
  if (m.cols != n || static_cast<int>(b.size()) != n)
    throw PreconditionError("solve_linear: square system required");
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  for (int k = 0; k < n; ++k) {
    int p = k;
    for (int i = k + 1; i < n; ++i)
      if (std::fabs(m(i, k)) > std::fabs(m(p, k))) p = i;
    if (std::fabs(m(p, k)) < 1e-300) throw NumericsError("solve_linear: singular matrix");
    if (p != k) {
      for (int j = 0; j < n; ++j) std::swap(m(k, j), m(p, j));
      std::swap(b[k], b[p]);
    }
    for (int i = k + 1; i < n; ++i) {
      const double f = m(i, k) / m(k, k);
      if (f == 0.0) continue;
      m(i, k) = 0.0;
      for (int j = k + 1; j < n; ++j) m(i, j) -= f * m(k, j);
      b[i] -= f * b[k];
    }
  }
  Vector x(n);
  for (int i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (int j = i + 1; j < n; ++j) s -= m(i, j) * x[j];
    x[i] = s / m(i, i);
  }
  return x;
}

}  // namespace gplab
