#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "gplab/errors.hpp"
#include "gplab/matrix.hpp"

// Self-contained dense kernels: cyclic Jacobi for symmetric eigenproblems,
// one-sided (Hestenes) Jacobi for singular values, Gram-Schmidt completion.
// Sizes stay in the low hundreds, where Jacobi is robust and accurate.

namespace gplab {

inline constexpr double kRankTol = 1e-10;  // relative to the largest singular value

struct EigResult {
  Vector values;  // descending
  Matrix vectors; // column i pairs with values[i]
};

namespace detail {

// Deterministic sign convention: the entry of largest magnitude
// (first such index) is made non-negative.
inline bool column_needs_flip(const Matrix& m, int j) {
  int arg = 0;
  double best = -1.0;
  for (int i = 0; i < m.rows; ++i) {
    const double v = std::fabs(m(i, j));
    if (v > best) {
      best = v;
      arg = i;
    }
  }
  return m(arg, j) < 0.0;
}

inline void flip_column(Matrix& m, int j) {
  for (int i = 0; i < m.rows; ++i) m(i, j) = -m(i, j);
}

}  // namespace detail

// Symmetric eigendecomposition S = V diag(values) V^T, values descending.
inline EigResult eigh(const Matrix& s) {
  const int n = s.rows;
  if (n == 0 || s.cols != n) throw PreconditionError("eigh: square nonempty matrix required");
  const double scale = std::max(1.0, max_abs(s));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::fabs(s(i, j) - s(j, i)) > 1e-10 * scale)
        throw PreconditionError("eigh: input is not symmetric within tolerance");

  Matrix a = s;
  Matrix v = Matrix::identity(n);
  const double stop = 1e-14 * std::max(frobenius_norm(a), 1e-300);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(2.0 * off) <= stop) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::fabs(apq) <= 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        const double tau = sn / (1.0 + c);
        const double app = a(p, p), aqq = a(q, q);
        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (int r = 0; r < n; ++r) {
          if (r != p && r != q) {
            const double arp = a(r, p), arq = a(r, q);
            a(r, p) = arp - sn * (arq + tau * arp);
            a(p, r) = a(r, p);
            a(r, q) = arq + sn * (arp - tau * arq);
            a(q, r) = a(r, q);
          }
          const double vrp = v(r, p), vrq = v(r, q);
          v(r, p) = vrp - sn * (vrq + tau * vrp);
          v(r, q) = vrq + sn * (vrp - tau * vrq);
        }
      }
    }
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int i, int j) { return a(i, i) > a(j, j); });
  EigResult out;
  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (int k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (int i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
    if (detail::column_needs_flip(out.vectors, k)) detail::flip_column(out.vectors, k);
  }
  return out;
}

struct SvdResult {
  Vector s;   // descending, length min(rows, cols)
  Matrix u;   // rows x min
  Matrix v;   // cols x min
};

namespace detail {

// One-sided Jacobi on a tall matrix (rows >= cols): orthogonalize columns by
// plane rotations; singular values are the final column norms.
inline SvdResult svd_tall(const Matrix& m, bool want_v) {
  const int rows = m.rows, cols = m.cols;
  Matrix w = m;
  Matrix v = want_v ? Matrix::identity(cols) : Matrix();
  for (int sweep = 0; sweep < 100; ++sweep) {
    bool rotated = false;
    for (int p = 0; p < cols; ++p) {
      for (int q = p + 1; q < cols; ++q) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (int i = 0; i < rows; ++i) {
          const double wp = w(i, p), wq = w(i, q);
          alpha += wp * wp;
          beta += wq * wq;
          gamma += wp * wq;
        }
        if (std::fabs(gamma) <= 1e-15 * std::sqrt(alpha * beta) || gamma == 0.0) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0 ? 1.0 : -1.0) /
                         (std::fabs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double sn = c * t;
        for (int i = 0; i < rows; ++i) {
          const double wp = w(i, p), wq = w(i, q);
          w(i, p) = c * wp - sn * wq;
          w(i, q) = sn * wp + c * wq;
        }
        if (want_v) {
          for (int i = 0; i < cols; ++i) {
            const double vp = v(i, p), vq = v(i, q);
            v(i, p) = c * vp - sn * vq;
            v(i, q) = sn * vp + c * vq;
          }
        }
      }
    }
    if (!rotated) break;
  }

  std::vector<double> norms(cols);
  for (int j = 0; j < cols; ++j) {
    double s = 0.0;
    for (int i = 0; i < rows; ++i) s += w(i, j) * w(i, j);
    norms[j] = std::sqrt(s);
  }
  std::vector<int> order(cols);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int i, int j) { return norms[i] > norms[j]; });

  SvdResult out;
  out.s.resize(cols);
  out.u = Matrix(rows, cols);
  if (want_v) out.v = Matrix(cols, cols);
  const double smax = cols > 0 ? norms[order[0]] : 0.0;
  for (int k = 0; k < cols; ++k) {
    const int j = order[k];
    out.s[k] = norms[j];
    if (norms[j] > smax * 1e-15 && norms[j] > 0.0) {
      for (int i = 0; i < rows; ++i) out.u(i, k) = w(i, j) / norms[j];
    }
    if (want_v)
      for (int i = 0; i < cols; ++i) out.v(i, k) = v(i, j);
    if (detail::column_needs_flip(out.u, k)) {
      detail::flip_column(out.u, k);
      if (want_v) detail::flip_column(out.v, k);
    }
  }
  return out;
}

}  // namespace detail

// Thin SVD m = u diag(s) v^T with s descending.
inline SvdResult svd(const Matrix& m, bool want_uv = true) {
  if (m.rows == 0 || m.cols == 0) throw PreconditionError("svd: nonempty matrix required");
  if (m.rows >= m.cols) return detail::svd_tall(m, want_uv);
  SvdResult t = detail::svd_tall(transpose(m), want_uv);
  std::swap(t.u, t.v);
  return t;
}

inline Vector singular_values(const Matrix& m) { return svd(m, false).s; }

inline double spectral_norm(const Matrix& m) { return singular_values(m).front(); }

inline int numeric_rank(const Vector& sv, double rel_tol = kRankTol) {
  if (sv.empty()) return 0;
  const double cutoff = sv.front() * rel_tol;
  int r = 0;
  for (double s : sv)
    if (s > cutoff) ++r;
  return r;
}

// A d-dimensional subspace of R^n held as an n x d orthonormal basis.
struct Subspace {
  Matrix basis;

  int ambient() const { return basis.rows; }
  int dim() const { return basis.cols; }
};

inline bool is_orthonormal(const Matrix& b, double tol = 1e-10) {
  for (int i = 0; i < b.cols; ++i) {
    for (int j = i; j < b.cols; ++j) {
      double s = 0.0;
      for (int r = 0; r < b.rows; ++r) s += b(r, i) * b(r, j);
      if (std::fabs(s - (i == j ? 1.0 : 0.0)) > tol) return false;
    }
  }
  return true;
}

// Rank-revealing span of a vector list; near-dependent directions are dropped
// at rel_tol relative to the largest singular value.
inline Subspace orthonormal_basis(const std::vector<Vector>& vectors,
                                  double rel_tol = kRankTol) {
  if (vectors.empty()) throw PreconditionError("orthonormal_basis: no input vectors");
  const int n = static_cast<int>(vectors.front().size());
  bool any = false;
  for (const auto& v : vectors) {
    if (static_cast<int>(v.size()) != n)
      throw PreconditionError("orthonormal_basis: mixed dimensions");
    if (norm2(v) > 1e-12) any = true;
  }
  if (!any) throw PreconditionError("orthonormal_basis: empty span (all inputs ~ 0)");

  Matrix m(n, static_cast<int>(vectors.size()));
  for (size_t j = 0; j < vectors.size(); ++j) m.set_col(static_cast<int>(j), vectors[j]);
  SvdResult s = svd(m, true);
  const int r = numeric_rank(s.s, rel_tol);
  Subspace out;
  out.basis = Matrix(n, r);
  for (int k = 0; k < r; ++k)
    for (int i = 0; i < n; ++i) out.basis(i, k) = s.u(i, k);
  return out;
}

inline Matrix projector(const Subspace& s) {
  if (!is_orthonormal(s.basis)) throw PreconditionError("projector: basis not orthonormal");
  return matmul(s.basis, transpose(s.basis));
}

namespace detail {

// Extend a set of orthonormal columns to a full basis, walking the standard
// basis in order (deterministic). Returns only the new directions.
inline std::vector<Vector> complete_orthonormal(const Matrix& b) {
  const int n = b.rows;
  std::vector<Vector> have;
  for (int j = 0; j < b.cols; ++j) have.push_back(b.col(j));
  std::vector<Vector> added;
  for (int j = 0; j < n && static_cast<int>(have.size()) < n; ++j) {
    Vector w(n, 0.0);
    w[j] = 1.0;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& u : have) axpy(-dot(u, w), u, w);
    const double nw = norm2(w);
    if (nw > 1e-10) {
      for (double& x : w) x /= nw;
      have.push_back(w);
      added.push_back(have.back());
    }
  }
  return added;
}

}  // namespace detail

// Orthonormal basis of ker(M) in R^cols; dim = cols - rank(M).
inline Subspace kernel_basis(const Matrix& m, double rel_tol = kRankTol) {
  if (m.rows == 0 || m.cols == 0) throw PreconditionError("kernel_basis: nonempty matrix");
  SvdResult s = svd(transpose(m), true);  // m^T = u diag(s) v^T, u spans row(M)
  const int r = numeric_rank(s.s, rel_tol);
  if (r >= m.cols) throw PreconditionError("kernel_basis: trivial kernel (full column rank)");
  Matrix rowspace(m.cols, r);
  for (int k = 0; k < r; ++k)
    for (int i = 0; i < m.cols; ++i) rowspace(i, k) = s.u(i, k);
  const std::vector<Vector> compl_dirs = detail::complete_orthonormal(rowspace);
  Subspace out;
  out.basis = Matrix(m.cols, static_cast<int>(compl_dirs.size()));
  for (size_t j = 0; j < compl_dirs.size(); ++j)
    out.basis.set_col(static_cast<int>(j), compl_dirs[j]);
  // contract: every kernel direction is annihilated up to 1e-9 * ||M||
  const double mnorm = s.s.empty() ? 0.0 : s.s.front();
  for (int j = 0; j < out.basis.cols; ++j) {
    const double res = norm2(matvec(m, out.basis.col(j)));
    if (res > 1e-9 * std::max(mnorm, 1e-300))
      throw NumericsError("kernel_basis: residual exceeds contract");
  }
  return out;
}

}  // namespace gplab
