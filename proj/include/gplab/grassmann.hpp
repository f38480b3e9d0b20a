#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include <json.hpp>

#include "gplab/ensemble.hpp"
#include "gplab/errors.hpp"
#include "gplab/matrix.hpp"
#include "gplab/numerics.hpp"
#include "gplab/rng.hpp"

// Epsilon-nets on G_{n,d} in the projector spectral metric, the constructive
// projection-decomposition recursion, and projection tail statistics.

namespace gplab {

namespace detail {

// smallest singular value of a d x d matrix held in a row-major stack buffer;
// closed forms for d <= 2, allocation-free Jacobi on g^T g for d <= 4
inline double smin_small(const double* g, int d) {
  if (d == 1) return std::fabs(g[0]);
  if (d == 2) {
    const double a = g[0], b = g[1], c = g[2], e = g[3];
    const double q1 = a * a + b * b + c * c + e * e;
    const double df = a * a + b * b - c * c - e * e;
    const double cr = a * c + b * e;
    const double q2 = std::sqrt(df * df + 4.0 * cr * cr);
    return std::sqrt(std::max(0.0, 0.5 * (q1 - q2)));
  }
  double s[16];  // s = g^T g, d <= 4
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) {
      double v = 0.0;
      for (int r = 0; r < d; ++r) v += g[r * d + i] * g[r * d + j];
      s[i * d + j] = v;
      s[j * d + i] = v;
    }
  }
  for (int sweep = 0; sweep < 30; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < d; ++p)
      for (int q = p + 1; q < d; ++q) off += s[p * d + q] * s[p * d + q];
    if (off < 1e-28) break;
    for (int p = 0; p < d; ++p) {
      for (int q = p + 1; q < d; ++q) {
        const double spq = s[p * d + q];
        if (std::fabs(spq) < 1e-300) continue;
        const double theta = (s[q * d + q] - s[p * d + p]) / (2.0 * spq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double co = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * co;
        const double tau = sn / (1.0 + co);
        const double spp = s[p * d + p], sqq = s[q * d + q];
        s[p * d + p] = spp - t * spq;
        s[q * d + q] = sqq + t * spq;
        s[p * d + q] = 0.0;
        s[q * d + p] = 0.0;
        for (int r = 0; r < d; ++r) {
          if (r == p || r == q) continue;
          const double srp = s[r * d + p], srq = s[r * d + q];
          s[r * d + p] = srp - sn * (srq + tau * srp);
          s[p * d + r] = s[r * d + p];
          s[r * d + q] = srq + sn * (srp - tau * srq);
          s[q * d + r] = s[r * d + q];
        }
      }
    }
  }
  double lam = s[0];
  for (int i = 1; i < d; ++i) lam = std::min(lam, s[i * d + i]);
  return std::sqrt(std::max(0.0, lam));
}

inline double basis_distance(const Matrix& b1, const Matrix& b2) {
  const int n = b1.rows, d = b1.cols;
  double g[16];
  if (d <= 4) {
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        double v = 0.0;
        for (int r = 0; r < n; ++r) v += b1(r, i) * b2(r, j);
        g[i * d + j] = v;
      }
    const double smin = std::min(1.0, smin_small(g, d));
    return std::sqrt(std::max(0.0, 1.0 - smin * smin));
  }
  const double smin = std::min(1.0, singular_values(matmul(transpose(b1), b2)).back());
  return std::sqrt(std::max(0.0, 1.0 - smin * smin));
}

}  // namespace detail

// dist(E, F) = ||Proj_E - Proj_F|| = sin of the largest principal angle
//            = sqrt(1 - s_min(B_E^T B_F)^2)   for equal dimensions.
// The principal-angle form costs a d x d SVD instead of an n x n one.
inline double grassmann_distance(const Subspace& e, const Subspace& f) {
  if (e.ambient() != f.ambient() || e.dim() != f.dim())
    throw PreconditionError("grassmann_distance: mismatched spaces");
  return detail::basis_distance(e.basis, f.basis);
}

// direct projector form; used as the test oracle for the identity above
inline double projector_distance(const Subspace& e, const Subspace& f) {
  return spectral_norm(projector(e) - projector(f));
}

// Haar-uniform subspace: orthonormalized Gaussian columns (rotation invariant).
// Modified Gram-Schmidt with re-orthogonalization; a.s. full rank.
inline Subspace random_subspace(rng::Stream& st, int n, int d) {
  Subspace s;
  s.basis = Matrix(n, d);
  int have = 0;
  while (have < d) {
    Vector w(n);
    for (auto& v : w) v = st.normal();
    for (int pass = 0; pass < 2; ++pass) {
      for (int j = 0; j < have; ++j) {
        double proj = 0.0;
        for (int i = 0; i < n; ++i) proj += s.basis(i, j) * w[i];
        for (int i = 0; i < n; ++i) w[i] -= proj * s.basis(i, j);
      }
    }
    const double nw = norm2(w);
    if (nw < 1e-8) continue;  // essentially impossible; redraw
    for (int i = 0; i < n; ++i) s.basis(i, have) = w[i] / nw;
    ++have;
  }
  return s;
}

struct GrassmannNet {
  int n = 0;
  int d = 0;
  double epsilon = 0.0;
  std::vector<Subspace> entries;
  double coverage_audit = 0.0;  // sampled covering radius estimate
};

struct NetOptions {
  std::uint64_t seed = 1;
  int entry_cap = 20000;   // bail out when the greedy net stops converging
  long audit_batch = 0;    // 0 -> max(200, sample_budget / 10)
  double stop_radius = 0;  // greedy stopping radius; 0 -> 0.85 * epsilon
};

// Greedy farthest-point selection over sample_budget random subspaces.
// The greedy stops once every construction sample sits within stop_radius of
// the net (slightly inside epsilon, so fresh points still land within
// epsilon), which keeps entries pairwise more than stop_radius > epsilon/2
// apart (packing). A fresh audit batch then estimates the covering radius;
// any audited hole is an error.
inline GrassmannNet build_net(int n, int d, double epsilon, long sample_budget,
                              NetOptions options = {}) {
  if (d < 1 || 2 * d > n) throw PreconditionError("build_net: need 1 <= d <= n/2");
  if (!(epsilon > 0.0 && epsilon <= 0.25))
    throw PreconditionError("build_net: epsilon must lie in (0, 1/4]");
  if (sample_budget < 2) throw PreconditionError("build_net: sample budget too small");
  const double stop = options.stop_radius > 0.0 ? options.stop_radius : 0.85 * epsilon;
  if (stop <= 0.5 * epsilon || stop > epsilon)
    throw PreconditionError("build_net: stop radius must lie in (epsilon/2, epsilon]");

  rng::Stream st(options.seed);
  std::vector<Subspace> samples;
  samples.reserve(sample_budget);
  for (long i = 0; i < sample_budget; ++i) samples.push_back(random_subspace(st, n, d));

  GrassmannNet net;
  net.n = n;
  net.d = d;
  net.epsilon = epsilon;
  net.entries.push_back(samples[0]);
  std::vector<double> dist_to_net(samples.size());
  for (size_t i = 0; i < samples.size(); ++i)
    dist_to_net[i] = grassmann_distance(samples[i], net.entries[0]);

  while (true) {
    size_t far = 0;
    for (size_t i = 1; i < samples.size(); ++i)
      if (dist_to_net[i] > dist_to_net[far]) far = i;
    if (dist_to_net[far] <= stop) break;
    if (static_cast<int>(net.entries.size()) >= options.entry_cap)
      throw CoverageError("build_net: entry cap hit before the sample set was covered",
                          dist_to_net[far]);
    net.entries.push_back(samples[far]);
    for (size_t i = 0; i < samples.size(); ++i)
      dist_to_net[i] = std::min(dist_to_net[i],
                                grassmann_distance(samples[i], net.entries.back()));
  }

  const long audit = options.audit_batch > 0
                         ? options.audit_batch
                         : std::max<long>(200, sample_budget / 10);
  double worst = 0.0;
  for (long i = 0; i < audit; ++i) {
    const Subspace f = random_subspace(st, n, d);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& entry : net.entries)
      best = std::min(best, grassmann_distance(f, entry));
    worst = std::max(worst, best);
  }
  net.coverage_audit = worst;
  if (worst > epsilon)
    throw CoverageError("build_net: audit found a hole (budget too small)", worst);
  return net;
}

// argmin over entries; deterministic lowest-index tie-break
inline std::pair<int, double> nearest(const GrassmannNet& net, const Subspace& f) {
  if (net.entries.empty()) throw PreconditionError("nearest: empty net");
  if (f.ambient() != net.n || f.dim() != net.d)
    throw PreconditionError("nearest: dimension mismatch with net");
  int arg = 0;
  double best = grassmann_distance(net.entries[0], f);
  for (size_t i = 1; i < net.entries.size(); ++i) {
    const double d = grassmann_distance(net.entries[i], f);
    if (d < best) {
      best = d;
      arg = static_cast<int>(i);
    }
  }
  return {arg, best};
}

struct DecompositionStep {
  int index = 0;       // net entry id
  Matrix d_op;         // n x n operator D_j
  double norm_bound = 0.0;  // 2 eps^{j-1}
};

namespace detail {

// F~ = E^perp cap (E + F), padded deterministically inside E^perp to dim d:
// append the standard-basis frame of E^perp in order.
inline Subspace residual_subspace(const Subspace& e, const Matrix& ef_basis, int d) {
  const int n = e.ambient();
  std::vector<Vector> dirs;
  const Matrix pe = projector(e);
  for (int j = 0; j < ef_basis.cols; ++j) {
    Vector w = ef_basis.col(j);
    const Vector pw = matvec(pe, w);
    axpy(-1.0, pw, w);
    dirs.push_back(w);
  }
  std::vector<Vector> pads;
  bool nonzero = false;
  for (const auto& v : dirs) nonzero = nonzero || norm2(v) > 1e-12;
  if (nonzero) {
    const Subspace ftil = orthonormal_basis(dirs);
    for (int j = 0; j < ftil.dim(); ++j) pads.push_back(ftil.basis.col(j));
  }
  const std::vector<Vector> frame = complete_orthonormal(e.basis);
  for (const auto& f : frame) {
    if (static_cast<int>(pads.size()) >= d) break;
    Vector w = f;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& u : pads) axpy(-dot(u, w), u, w);
    const double nw = norm2(w);
    if (nw > 1e-10) {
      for (auto& x : w) x /= nw;
      pads.push_back(w);
    }
  }
  if (static_cast<int>(pads.size()) != d)
    throw NumericsError("decompose_projection: could not pad the residual subspace");
  Subspace out;
  out.basis = Matrix(n, d);
  for (int j = 0; j < d; ++j) out.basis.set_col(j, pads[j]);
  return out;
}

}  // namespace detail

// The proof's recursion: F_0 := F; at step j take the nearest net entry E,
//   A~_j = Id + (P_{F_{j-1}} - P_E) P_{E+F_{j-1}},   B_j = A~_j - Id,
//   D_j  = (B_1 ... B_{j-1}) A~_j,   F_j = the padded residual subspace,
// giving ||D_j|| <= 2 eps^{j-1} and m-term residual <= 2 eps^m / (1 - eps).
inline std::vector<DecompositionStep> decompose_projection(const GrassmannNet& net,
                                                           const Subspace& f, int terms) {
  if (terms < 1) throw PreconditionError("decompose_projection: need m >= 1");
  const int n = net.n, d = net.d;
  const Matrix id = Matrix::identity(n);
  const Matrix pf = projector(f);
  Matrix bprod = id;
  Matrix partial(n, n);
  Subspace cur = f;
  std::vector<DecompositionStep> steps;
  for (int j = 1; j <= terms; ++j) {
    const auto [idx, dist] = nearest(net, cur);
    if (dist > net.epsilon)
      throw CoverageError("decompose_projection: the audit missed a hole", dist);
    const Subspace& e = net.entries[idx];
    std::vector<Vector> both;
    for (int c = 0; c < d; ++c) both.push_back(e.basis.col(c));
    for (int c = 0; c < d; ++c) both.push_back(cur.basis.col(c));
    const Subspace ef = orthonormal_basis(both);
    const Matrix pef = projector(ef);
    const Matrix diff = projector(cur) - projector(e);
    const Matrix bj = matmul(diff, pef);
    const Matrix atil = id + bj;

    DecompositionStep step;
    step.index = idx;
    step.d_op = matmul(bprod, atil);
    step.norm_bound = 2.0 * std::pow(net.epsilon, j - 1);
    if (spectral_norm(step.d_op) > step.norm_bound + 1e-9)
      throw NumericsError("decompose_projection: operator norm bound violated");
    partial = partial + matmul(step.d_op, projector(e));
    const double tail = 2.0 * std::pow(net.epsilon, j) / (1.0 - net.epsilon);
    if (spectral_norm(pf - partial) > tail + 1e-8)
      throw NumericsError("decompose_projection: residual bound violated");
    steps.push_back(std::move(step));

    bprod = matmul(bprod, bj);
    cur = detail::residual_subspace(e, ef.basis, d);
  }
  return steps;
}

inline nlohmann::json to_json(const GrassmannNet& net) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& s : net.entries) entries.push_back(s.basis.a);  // row-major
  return nlohmann::json{{"n", net.n},
                        {"d", net.d},
                        {"epsilon", net.epsilon},
                        {"coverage_audit", net.coverage_audit},
                        {"entries", entries}};
}

inline GrassmannNet net_from_json(const nlohmann::json& j) {
  GrassmannNet net;
  try {
    net.n = j.at("n").get<int>();
    net.d = j.at("d").get<int>();
    net.epsilon = j.at("epsilon").get<double>();
    net.coverage_audit = j.value("coverage_audit", 0.0);
    for (const auto& e : j.at("entries")) {
      Subspace s;
      s.basis = Matrix(net.n, net.d);
      if (e.size() != s.basis.a.size())
        throw ConfigError("grassmann net json: entry size does not match n*d");
      for (size_t i = 0; i < s.basis.a.size(); ++i) s.basis.a[i] = e.at(i).get<double>();
      if (!is_orthonormal(s.basis))
        throw ConfigError("grassmann net json: entry basis is not orthonormal");
      net.entries.push_back(std::move(s));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(std::string("grassmann net json: ") + ex.what());
  }
  return net;
}

struct TailCount {
  long count = 0;
  double bound = 0.0;
};

// #{j : ||Proj_F X_j|| > 8 s sqrt(d)} against 2 C^2 N log2(s) / s^2.
inline TailCount projection_tail_counts(const Ensemble& e, const Subspace& f, double s,
                                        double c = 10.0) {
  if (f.ambient() != e.n()) throw PreconditionError("projection_tail_counts: bad subspace");
  if (s < c) throw PreconditionError("projection_tail_counts: s must be >= C");
  const double thr = 8.0 * s * std::sqrt(static_cast<double>(f.dim()));
  TailCount out;
  for (int j = 0; j < e.N(); ++j) {
    const Vector coords = matvec_t(f.basis, e.A.col(j));
    if (norm2(coords) > thr) ++out.count;
  }
  out.bound = 2.0 * c * c * e.N() * std::log2(s) / (s * s);
  return out;
}

}  // namespace gplab
