#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "gplab/ensemble.hpp"
#include "gplab/errors.hpp"
#include "gplab/matrix.hpp"
#include "gplab/numerics.hpp"

namespace gplab {

// Minkowski functional of P_{N,n} = conv{±X_j} as basis pursuit:
//
//   ||y||_P = min ||beta||_1  s.t.  A beta = y,
//
// solved as the standard-form LP min 1'(b+ + b-), A(b+ - b-) = y, b± >= 0,
// by primal simplex. Because A has full row rank, a basic feasible vertex is
// available immediately: take the first n independent columns B0 of A and
// sign them entrywise against x = B0^{-1} y. That kills the artificial
// phase outright, and B0^{-1} A is cached per ensemble so each solve starts
// from a clean tableau. Pricing is Dantzig (most negative reduced cost,
// lowest index on ties) and falls back permanently to Bland's rule once a
// degeneracy stall is detected, so termination is guaranteed and the
// selected optimal vertex is a deterministic function of (A, y).
// The returned certificate is refactorized: beta and the dual vector come
// from fresh solves against the final basis, not the accumulated tableau.

struct CoefficientVector {
  Vector beta;
  double l1 = 0.0;
};

struct NormCertificate {
  double value = 0.0;
  CoefficientVector beta;
  double residual = 0.0;    // ||A beta - y||_2
  Vector dual;              // u with A^T u in [-1,1], <y,u> = value
  double dual_gap = 0.0;    // |value - <y,u>|
  double dual_infeas = 0.0; // max(0, ||A^T u||_inf - 1)
};

struct SimplexOptions {
  int max_iterations = 50000;
  double rc_tol = 1e-9;     // reduced-cost optimality tolerance
  double pivot_tol = 1e-7;  // minimum admissible pivot magnitude
};

class PolytopeNorm {
 public:
  explicit PolytopeNorm(const Ensemble& ensemble, SimplexOptions options = {})
      : A_(ensemble.A), n_(ensemble.n()), N_(ensemble.N()), opt_(options) {
    prepare();
  }

  // Test constructor for hand-built matrices.
  explicit PolytopeNorm(const Matrix& a, SimplexOptions options = {})
      : A_(a), n_(a.rows), N_(a.cols), opt_(options) {
    if (N_ < n_) throw PreconditionError("polytope norm: need N >= n columns");
    prepare();
  }

  int n() const { return n_; }
  int N() const { return N_; }
  const Matrix& matrix() const { return A_; }

  NormCertificate solve(const Vector& y) const {
    if (static_cast<int>(y.size()) != n_)
      throw PreconditionError("polytope norm: y has wrong dimension");
    const double ynorm = norm2(y);
    NormCertificate cert;
    cert.beta.beta.assign(N_, 0.0);
    cert.dual.assign(n_, 0.0);
    if (norm_inf(y) == 0.0) return cert;  // ||0||_P = 0 with the zero certificate

    Tableau t = build_tableau(y);
    run_simplex(t, ynorm);
    return refactorize(t, y);
  }

 private:
  struct Tableau {
    int n = 0, ncols = 0;
    // rows 0..n-1: constraints, each of length ncols+1 (rhs last);
    // row n: reduced costs, slot ncols holds -objective.
    std::vector<double> a;
    std::vector<int> basis;

    double& at(int i, int j) { return a[static_cast<size_t>(i) * (ncols + 1) + j]; }
    double at(int i, int j) const { return a[static_cast<size_t>(i) * (ncols + 1) + j]; }
  };

  // first n independent columns of A (a.s. the first n) and their LU data,
  // plus the reduced matrix B0^{-1} A used to seed every tableau
  void prepare() {
    const Vector sv = singular_values(A_);
    if (numeric_rank(sv) < n_)
      throw PreconditionError("polytope norm: A is rank deficient (degenerate polytope)");
    basis0_.clear();
    std::vector<Vector> kept;
    for (int j = 0; j < N_ && static_cast<int>(basis0_.size()) < n_; ++j) {
      // greedy rank-revealing selection by Gram-Schmidt residual
      Vector w = A_.col(j);
      for (int pass = 0; pass < 2; ++pass)
        for (const auto& u : kept) axpy(-dot(u, w), u, w);
      const double nw = norm2(w);
      if (nw > 1e-10 * sv.front()) {
        basis0_.push_back(j);
        for (auto& v : w) v /= nw;
        kept.push_back(w);
      }
    }
    if (static_cast<int>(basis0_.size()) != n_)
      throw PreconditionError("polytope norm: could not assemble a starting basis");
    Matrix b0(n_, n_);
    for (int i = 0; i < n_; ++i) b0.set_col(i, A_.col(basis0_[i]));
    // reduced matrix M0 = B0^{-1} A column by column
    m0_ = Matrix(n_, N_);
    for (int j = 0; j < N_; ++j) m0_.set_col(j, solve_linear(b0, A_.col(j)));
    b0_ = b0;
  }

  Tableau build_tableau(const Vector& y) const {
    const Vector x = solve_linear(b0_, y);
    Tableau t;
    t.n = n_;
    t.ncols = 2 * N_;
    t.a.assign(static_cast<size_t>(n_ + 1) * (t.ncols + 1), 0.0);
    t.basis.resize(n_);
    for (int i = 0; i < n_; ++i) {
      const double rs = x[i] >= 0.0 ? 1.0 : -1.0;  // sign the starting basis
      for (int j = 0; j < N_; ++j) {
        const double v = rs * m0_(i, j);
        t.at(i, j) = v;
        t.at(i, N_ + j) = -v;
      }
      t.at(i, t.ncols) = rs * x[i];
      t.basis[i] = rs > 0 ? basis0_[i] : N_ + basis0_[i];
    }
    // all costs are 1 and the starting basis is feasible:
    // rc_j = 1 - column sum, objective = sum of basic values
    double obj = 0.0;
    for (int i = 0; i < n_; ++i) obj += t.at(i, t.ncols);
    for (int j = 0; j < t.ncols; ++j) {
      double colsum = 0.0;
      for (int i = 0; i < n_; ++i) colsum += t.at(i, j);
      t.at(n_, j) = 1.0 - colsum;
    }
    t.at(n_, t.ncols) = -obj;
    return t;
  }

  void pivot(Tableau& t, int row, int col) const {
    const double p = t.at(row, col);
    const double inv = 1.0 / p;
    for (int j = 0; j <= t.ncols; ++j) t.at(row, j) *= inv;
    for (int i = 0; i <= t.n; ++i) {
      if (i == row) continue;
      const double f = t.at(i, col);
      if (f == 0.0) continue;
      double* ri = &t.a[static_cast<size_t>(i) * (t.ncols + 1)];
      const double* rp = &t.a[static_cast<size_t>(row) * (t.ncols + 1)];
      for (int j = 0; j <= t.ncols; ++j) ri[j] -= f * rp[j];
      ri[col] = 0.0;
    }
    t.at(row, col) = 1.0;
    t.basis[row] = col;
  }

  void run_simplex(Tableau& t, double ynorm) const {
    std::vector<bool> dead(t.ncols, false);
    bool bland = false;
    int stall = 0;
    for (int iter = 0; iter < opt_.max_iterations; ++iter) {
      int enter = -1;
      if (bland) {
        for (int j = 0; j < t.ncols; ++j) {
          if (!dead[j] && t.at(t.n, j) < -opt_.rc_tol) {
            enter = j;
            break;  // Bland: lowest eligible index
          }
        }
      } else {
        double most = -opt_.rc_tol;
        for (int j = 0; j < t.ncols; ++j) {
          const double rc = t.at(t.n, j);
          if (!dead[j] && rc < most) {
            enter = j;
            most = rc;
          }
        }
      }
      if (enter < 0) return;  // optimal
      // Ratio test. Exact ties are the degenerate steps: under Bland the tie
      // breaks on the lowest basis index (termination guarantee); otherwise
      // it breaks toward the largest pivot, which keeps 1e-9-sized pivots
      // from amplifying the tableau by nine digits.
      int leave = -1;
      double best = 0.0;
      for (int i = 0; i < t.n; ++i) {
        const double coef = t.at(i, enter);
        if (coef <= opt_.pivot_tol) continue;
        double rhs = t.at(i, t.ncols);
        if (rhs < 0.0 && rhs > -1e-11) rhs = 0.0;  // rounding dust
        const double ratio = rhs / coef;
        const bool tie_wins = bland ? t.basis[i] < t.basis[leave < 0 ? i : leave]
                                    : coef > t.at(leave < 0 ? i : leave, enter);
        if (leave < 0 || ratio < best || (ratio == best && tie_wins)) {
          leave = i;
          best = ratio;
        }
      }
      if (leave < 0) {
        // This LP is never truly unbounded (objective >= 0): a column with no
        // admissible pivot is numerical debris. Retire it; the refactorized
        // dual certificate still validates the final vertex.
        dead[enter] = true;
        continue;
      }
      const double before = t.at(t.n, t.ncols);
      pivot(t, leave, enter);
      // degeneracy stall -> switch to Bland for guaranteed termination
      if (!bland) {
        if (t.at(t.n, t.ncols) - before < 1e-12 * (1.0 + std::fabs(before))) {
          if (++stall >= 64) bland = true;
        } else {
          stall = 0;
        }
      }
    }
    double bound = -t.at(t.n, t.ncols);
    throw SolverError("polytope norm: simplex iteration cap exceeded (1+||y||=" +
                          std::to_string(1.0 + ynorm) + ")",
                      bound);
  }

  NormCertificate refactorize(const Tableau& t, const Vector& y) const {
    Matrix b(n_, n_);
    std::vector<int> cols(n_);
    std::vector<double> sign(n_);
    for (int i = 0; i < n_; ++i) {
      const int j = t.basis[i];
      cols[i] = j < N_ ? j : j - N_;
      sign[i] = j < N_ ? 1.0 : -1.0;
      for (int r = 0; r < n_; ++r) b(r, i) = sign[i] * A_(r, cols[i]);
    }
    const Vector xb = solve_linear(b, y);
    NormCertificate cert;
    cert.beta.beta.assign(N_, 0.0);
    for (int i = 0; i < n_; ++i) cert.beta.beta[cols[i]] += sign[i] * xb[i];
    cert.beta.l1 = norm1(cert.beta.beta);
    cert.value = cert.beta.l1;
    cert.residual = norm2(vdiff(matvec(A_, cert.beta.beta), y));
    const double feas_tol = 1e-9 * (1.0 + norm2(y));
    if (cert.residual > feas_tol)
      throw NumericsError("polytope norm: feasibility residual exceeds contract");
    cert.dual = solve_linear(transpose(b), Vector(n_, 1.0));
    cert.dual_gap = std::fabs(cert.value - dot(y, cert.dual));
    cert.dual_infeas = std::max(0.0, norm_inf(matvec_t(A_, cert.dual)) - 1.0);
    return cert;
  }

  Matrix A_;
  int n_ = 0;
  int N_ = 0;
  SimplexOptions opt_;
  std::vector<int> basis0_;
  Matrix b0_;
  Matrix m0_;
};

inline NormCertificate minkowski_norm(const Ensemble& e, const Vector& y) {
  return PolytopeNorm(e).solve(y);
}

inline CoefficientVector coefficient_vector(const Ensemble& e, const Vector& y) {
  return PolytopeNorm(e).solve(y).beta;
}

// beta of the signed combination sum_i sigma_i y_i
inline CoefficientVector sign_combination_beta(const Ensemble& e,
                                               const std::vector<Vector>& ys,
                                               const std::vector<int>& sigma) {
  if (ys.empty()) throw PreconditionError("sign_combination_beta: need k >= 1 vectors");
  if (sigma.size() != ys.size())
    throw PreconditionError("sign_combination_beta: sigma length mismatch");
  Vector sum(ys.front().size(), 0.0);
  for (size_t i = 0; i < ys.size(); ++i) {
    if (sigma[i] != 1 && sigma[i] != -1)
      throw PreconditionError("sign_combination_beta: sigma entries must be +-1");
    axpy(static_cast<double>(sigma[i]), ys[i], sum);
  }
  return coefficient_vector(e, sum);
}

inline bool membership(const Ensemble& e, const Vector& x) {
  return minkowski_norm(e, x).value <= 1.0 + 1e-9;
}

}  // namespace gplab
