#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gplab/ensemble.hpp"
#include "gplab/errors.hpp"
#include "gplab/l1norm.hpp"
#include "gplab/matrix.hpp"
#include "gplab/numerics.hpp"
#include "gplab/rng.hpp"

// Cotype-constant estimation for arbitrary norm oracles, sign-average
// statistics, dyadic eigenbands, J(t)/m_delta diagnostics and the l_q
// direct-sum norm.

namespace gplab {

namespace stream_id {
inline constexpr std::uint64_t kSpansofcomp = 201;
inline constexpr std::uint64_t kMcSigns = 202;
}  // namespace stream_id

// An abstract norm evaluator. Factories validate homogeneity and the
// triangle inequality on random probe triples at registration.
struct NormOracle {
  std::string name;
  int dim = 0;
  std::function<double(const Vector&)> eval;

  double operator()(const Vector& x) const { return eval(x); }
};

namespace detail {

inline void validate_norm_axioms(const NormOracle& oracle, std::uint64_t probe_seed = 4) {
  rng::Stream st(probe_seed);
  for (int trial = 0; trial < 16; ++trial) {
    Vector x(oracle.dim), y(oracle.dim);
    for (auto& v : x) v = st.normal();
    for (auto& v : y) v = st.normal();
    const double lam = 0.25 + 3.0 * st.uniform();
    const double nx = oracle(x), ny = oracle(y);
    if (std::fabs(oracle(scaled(x, lam)) - lam * nx) > 1e-9 * (1.0 + lam * nx))
      throw PreconditionError("norm oracle '" + oracle.name + "': homogeneity fails");
    if (oracle(vsum(x, y)) > nx + ny + 1e-9 * (1.0 + nx + ny))
      throw PreconditionError("norm oracle '" + oracle.name + "': triangle inequality fails");
  }
}

}  // namespace detail

inline NormOracle euclidean_oracle(int dim) {
  NormOracle o{"euclidean", dim, [](const Vector& x) { return norm2(x); }};
  detail::validate_norm_axioms(o);
  return o;
}

inline NormOracle sup_oracle(int dim) {
  NormOracle o{"sup", dim, [](const Vector& x) { return norm_inf(x); }};
  detail::validate_norm_axioms(o);
  return o;
}

inline NormOracle polytope_oracle(std::shared_ptr<const PolytopeNorm> solver) {
  NormOracle o{"polytope", solver->n(),
               [solver](const Vector& x) { return solver->solve(x).value; }};
  detail::validate_norm_axioms(o);
  return o;
}

// (sum_i v_i^q)^{1/q} for non-negative component norms
inline double lq_direct_sum_norm(const Vector& component_norms, double q) {
  if (q < 1.0) throw PreconditionError("lq_direct_sum_norm: q must be >= 1");
  for (double v : component_norms)
    if (v < 0.0) throw PreconditionError("lq_direct_sum_norm: negative component norm");
  double s = 0.0;
  for (double v : component_norms) s += std::pow(v, q);
  return std::pow(s, 1.0 / q);
}

// Direct-sum norm on a concatenation of component spaces.
inline NormOracle lq_sum_oracle(const std::vector<NormOracle>& components, double q) {
  if (components.empty()) throw PreconditionError("lq_sum_oracle: no components");
  int dim = 0;
  for (const auto& c : components) dim += c.dim;
  NormOracle o;
  o.name = "lq_sum";
  o.dim = dim;
  o.eval = [components, q](const Vector& x) {
    Vector norms;
    size_t off = 0;
    for (const auto& c : components) {
      Vector part(x.begin() + off, x.begin() + off + c.dim);
      norms.push_back(c(part));
      off += c.dim;
    }
    return lq_direct_sum_norm(norms, q);
  };
  detail::validate_norm_axioms(o);
  return o;
}

enum class SignMode { Exact, MonteCarlo };

namespace detail {

// Enumerate sigma with sigma_0 fixed to +1 (norms are symmetric, so the mean
// over the half equals the mean over all 2^k signs). Gray-code order keeps
// the running sum incremental: one vector update per sigma.
template <typename Fn>
void for_each_half_sigma(const std::vector<Vector>& ys, Fn&& fn) {
  const int k = static_cast<int>(ys.size());
  const int n = static_cast<int>(ys.front().size());
  std::vector<int> sigma(k, 1);
  Vector sum(n, 0.0);
  for (const auto& y : ys) axpy(1.0, y, sum);
  const std::uint64_t count = k >= 2 ? (1ULL << (k - 1)) : 1ULL;
  std::uint64_t gray = 0;
  for (std::uint64_t step = 0;; ++step) {
    fn(static_cast<const std::vector<int>&>(sigma), static_cast<const Vector&>(sum));
    if (step + 1 >= count) break;
    const std::uint64_t next = (step + 1) ^ ((step + 1) >> 1);
    const int flip = 1 + static_cast<int>(__builtin_ctzll(gray ^ next));
    gray = next;
    sigma[flip] = -sigma[flip];
    axpy(2.0 * sigma[flip], ys[flip], sum);
  }
}

}  // namespace detail

struct SignAverage {
  double mean = 0.0;
  double stderr_ = 0.0;  // 0 in exact mode
  SignMode mode = SignMode::Exact;
  long trials = 0;
};

// E_sigma || sum_i sigma_i y_i || under the oracle.
inline SignAverage avg_sign_norm(const NormOracle& oracle, const std::vector<Vector>& ys,
                                 SignMode mode, long trials = 0, std::uint64_t seed = 0) {
  if (ys.empty()) throw PreconditionError("avg_sign_norm: need k >= 1 vectors");
  const int k = static_cast<int>(ys.size());
  SignAverage out;
  out.mode = mode;
  if (mode == SignMode::Exact) {
    if (k > 20) throw PreconditionError("avg_sign_norm: exact mode capped at k <= 20");
    double total = 0.0;
    long cnt = 0;
    detail::for_each_half_sigma(ys, [&](const std::vector<int>&, const Vector& sum) {
      total += oracle(sum);
      ++cnt;
    });
    out.mean = total / cnt;
    out.trials = 2 * cnt;
    return out;
  }
  if (trials < 2) throw PreconditionError("avg_sign_norm: MC mode needs trials >= 2");
  rng::Stream st(rng::derive_seed(seed, stream_id::kMcSigns));
  double total = 0.0, totsq = 0.0;
  const int n = static_cast<int>(ys.front().size());
  for (long t = 0; t < trials; ++t) {
    Vector sum(n, 0.0);
    for (int i = 0; i < k; ++i) axpy(st.sign(), ys[i], sum);
    const double v = oracle(sum);
    total += v;
    totsq += v * v;
  }
  out.mean = total / trials;
  const double var = std::max(0.0, (totsq - trials * out.mean * out.mean) / (trials - 1));
  out.stderr_ = std::sqrt(var / trials);
  out.trials = trials;
  return out;
}

struct CotypeEstimate {
  double q = 2.0;
  double constant = 0.0;
  double stderr_ = 0.0;
  SignMode method = SignMode::Exact;
  long trials = 0;
};

// Smallest C_q with E_sigma ||sum sigma_i y_i||^q >= C_q^{-q} sum ||y_i||^q
// for this family: (sum ||y_i||^q / E ||sum sigma y||^q)^{1/q}.
inline CotypeEstimate cotype_constant(const NormOracle& oracle, const std::vector<Vector>& ys,
                                      double q, SignMode mode, long trials = 0,
                                      std::uint64_t seed = 0) {
  if (q < 2.0) throw PreconditionError("cotype_constant: q must be >= 2");
  if (ys.empty()) throw PreconditionError("cotype_constant: need k >= 1 vectors");
  double num = 0.0;
  for (const auto& y : ys) num += std::pow(oracle(y), q);
  if (num <= 0.0)
    throw PreconditionError("cotype_constant: all-zero family, estimate undefined");

  CotypeEstimate est;
  est.q = q;
  est.method = mode;
  double mean_q = 0.0, stderr_q = 0.0;
  if (mode == SignMode::Exact) {
    const int k = static_cast<int>(ys.size());
    if (k > 20) throw PreconditionError("cotype_constant: exact mode capped at k <= 20");
    double total = 0.0;
    long cnt = 0;
    detail::for_each_half_sigma(ys, [&](const std::vector<int>&, const Vector& sum) {
      total += std::pow(oracle(sum), q);
      ++cnt;
    });
    mean_q = total / cnt;
    est.trials = 2 * cnt;
  } else {
    if (trials < 2) throw PreconditionError("cotype_constant: MC mode needs trials >= 2");
    rng::Stream st(rng::derive_seed(seed, stream_id::kMcSigns));
    double total = 0.0, totsq = 0.0;
    const int n = static_cast<int>(ys.front().size());
    for (long t = 0; t < trials; ++t) {
      Vector sum(n, 0.0);
      for (const auto& y : ys) axpy(st.sign(), y, sum);
      const double v = std::pow(oracle(sum), q);
      total += v;
      totsq += v * v;
    }
    mean_q = total / trials;
    const double var = std::max(0.0, (totsq - trials * mean_q * mean_q) / (trials - 1));
    stderr_q = std::sqrt(var / trials);
    est.trials = trials;
  }
  if (mean_q <= 0.0)
    throw PreconditionError("cotype_constant: degenerate sign averages (all zero)");
  est.constant = std::pow(num / mean_q, 1.0 / q);
  // first-order propagation of the q-th-moment standard error
  est.stderr_ = est.constant * stderr_q / (q * mean_q);
  return est;
}

struct DyadicBands {
  std::map<int, Subspace> bands;  // p -> eigenband, eigenvalues in (2^p, 2^{p+1}]
  Matrix covariance;              // Sigma = sum y_i y_i^T
  int rank = 0;
};

namespace detail {

// integer p with 2^p < lambda <= 2^{p+1}, robust at dyadic boundaries
inline int dyadic_band_index(double lambda) {
  int p = static_cast<int>(std::floor(std::log2(lambda)));
  while (lambda <= std::ldexp(1.0, p)) --p;
  while (lambda > std::ldexp(1.0, p + 1)) ++p;
  return p;
}

}  // namespace detail

inline DyadicBands dyadic_bands(const std::vector<Vector>& ys) {
  if (ys.empty()) throw PreconditionError("dyadic_bands: need k >= 1 vectors");
  const int n = static_cast<int>(ys.front().size());
  for (const auto& y : ys)
    if (std::fabs(norm2(y) - 1.0) > 1e-9)
      throw PreconditionError("dyadic_bands: vectors must have unit Euclidean norm");
  DyadicBands out;
  out.covariance = Matrix(n, n);
  for (const auto& y : ys)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out.covariance(i, j) += y[i] * y[j];
  const EigResult eig = eigh(out.covariance);
  std::map<int, std::vector<Vector>> groups;
  for (int i = 0; i < n; ++i) {
    if (eig.values[i] <= 1e-12) continue;  // null directions dropped
    groups[detail::dyadic_band_index(eig.values[i])].push_back(eig.vectors.col(i));
    ++out.rank;
  }
  for (auto& [p, vecs] : groups) {
    Subspace s;
    s.basis = Matrix(n, static_cast<int>(vecs.size()));
    for (size_t j = 0; j < vecs.size(); ++j) s.basis.set_col(static_cast<int>(j), vecs[j]);
    out.bands.emplace(p, std::move(s));
  }
  return out;
}

struct DyadDecompVerdict {
  bool hypothesis_holds = false;
  double tail_probability = 0.0;
  bool alternative_a = false;   // projection onto span(Y) is long
  bool alternative_b = false;   // some band 1 <= p <= log2(k) carries mass
  double margin_a = 0.0;
  double margin_b = 0.0;
};

// Exact evaluation of P_sigma{ |<Z, sum sigma_i y_i>| >= t sqrt(k) }, then the
// two alternatives of the dyadic decomposition dichotomy with constant c.
inline DyadDecompVerdict dyaddecomp_check(const std::vector<Vector>& ys, const Vector& z,
                                          double t, double c = 0.01) {
  const int k = static_cast<int>(ys.size());
  const int n = static_cast<int>(ys.front().size());
  if (k < 2 || k > n) throw PreconditionError("dyaddecomp_check: need 2 <= k <= n");
  if (k > 20) throw PreconditionError("dyaddecomp_check: exact enumeration capped at k <= 20");
  if (t < 1.0) throw PreconditionError("dyaddecomp_check: t must be >= 1");

  Vector inner(k);
  for (int i = 0; i < k; ++i) inner[i] = dot(z, ys[i]);
  const double thr = t * std::sqrt(static_cast<double>(k));
  long hits = 0;
  const std::uint64_t half = k >= 2 ? (1ULL << (k - 1)) : 1ULL;
  // Gray enumeration over the scalar sum (sign symmetry doubles the half-count)
  double sum = 0.0;
  for (double v : inner) sum += v;
  std::vector<int> sigma(k, 1);
  std::uint64_t gray = 0;
  for (std::uint64_t step = 0;; ++step) {
    if (std::fabs(sum) >= thr) ++hits;
    if (step + 1 >= half) break;
    const std::uint64_t next = (step + 1) ^ ((step + 1) >> 1);
    const int flip = 1 + static_cast<int>(__builtin_ctzll(gray ^ next));
    gray = next;
    sigma[flip] = -sigma[flip];
    sum += 2.0 * sigma[flip] * inner[flip];
  }

  DyadDecompVerdict v;
  v.tail_probability = static_cast<double>(hits) / half;  // = (2 hits) / 2^k
  v.hypothesis_holds = v.tail_probability >= std::pow(static_cast<double>(k), -100.0);
  if (!v.hypothesis_holds) return v;

  const double logk = std::log(static_cast<double>(k));
  const Subspace span = orthonormal_basis(ys);
  const double proj_span = norm2(matvec_t(span.basis, z));
  const double thr_a = c * t * std::sqrt(static_cast<double>(k)) / std::sqrt(logk);
  v.margin_a = proj_span - thr_a;
  v.alternative_a = v.margin_a >= 0.0;

  const DyadicBands bands = dyadic_bands(ys);
  const int pmax = static_cast<int>(std::floor(std::log2(static_cast<double>(k)) + 1e-12));
  v.margin_b = -std::numeric_limits<double>::infinity();
  for (const auto& [p, band] : bands.bands) {
    if (p < 1 || p > pmax) continue;
    const double proj = norm2(matvec_t(band.basis, z));
    const double thr_b =
        c * t * std::sqrt(static_cast<double>(band.dim())) / std::pow(logk, 1.5);
    v.margin_b = std::max(v.margin_b, proj - thr_b);
  }
  v.alternative_b = v.margin_b >= 0.0;
  return v;
}

// J(t): irregular generator indices. Condition (1): at least max(1, ceil(f 2^k))
// sign vectors put |<X_j, sum sigma y>| above t sqrt(k), with f defaulting to
// the default k^{-100} (which reads "at least one sigma" at desk scale).
// Condition (2): some sigma pushes the inner product above Ctilde k^11.
inline std::vector<int> j_set(const Ensemble& e, const std::vector<Vector>& ys, double t,
                              std::optional<double> fraction_override = std::nullopt,
                              double ctilde = 1.0) {
  const int k = static_cast<int>(ys.size());
  if (k < 2 || k > 20) throw PreconditionError("j_set: exact enumeration needs 2 <= k <= 20");
  const double f = fraction_override.value_or(std::pow(static_cast<double>(k), -100.0));
  const double kpow = ctilde * std::pow(static_cast<double>(k), 11.0);
  const double thr = t * std::sqrt(static_cast<double>(k));
  const std::uint64_t full = 1ULL << k;
  const long need = std::max<long>(
      1, static_cast<long>(std::ceil(f * static_cast<double>(full) - 1e-12)));

  std::vector<int> out;
  const std::uint64_t half = 1ULL << (k - 1);
  for (int j = 0; j < e.N(); ++j) {
    Vector inner(k);
    for (int i = 0; i < k; ++i) inner[i] = dot(e.A.col(j), ys[i]);
    double sum = 0.0;
    for (double v : inner) sum += v;
    std::vector<int> sigma(k, 1);
    std::uint64_t gray = 0;
    long hits = 0;
    double maxabs = 0.0;
    for (std::uint64_t step = 0;; ++step) {
      const double a = std::fabs(sum);
      if (a >= thr) ++hits;
      maxabs = std::max(maxabs, a);
      if (step + 1 >= half) break;
      const std::uint64_t next = (step + 1) ^ ((step + 1) >> 1);
      const int flip = 1 + static_cast<int>(__builtin_ctzll(gray ^ next));
      gray = next;
      sigma[flip] = -sigma[flip];
      sum += 2.0 * sigma[flip] * inner[flip];
    }
    if (2 * hits >= need || maxabs >= kpow) out.push_back(j);
  }
  return out;
}

// m_delta(y, r) histogram of a coefficient vector: bucket 0 collects
// |beta_j| <= delta/n, bucket r >= 1 collects (delta/n) (2^{r-1}, 2^r].
inline std::vector<long> m_delta_histogram(const CoefficientVector& beta, double delta,
                                           int n) {
  if (!(delta > 0.0 && delta <= 1.0))
    throw PreconditionError("m_delta_histogram: delta must lie in (0,1]");
  if (n < 1) throw PreconditionError("m_delta_histogram: n must be >= 1");
  const double scale = delta / n;
  std::vector<long> counts(1, 0);
  for (double b : beta.beta) {
    const double a = std::fabs(b);
    if (a <= scale) {
      ++counts[0];
      continue;
    }
    int r = std::max(1, static_cast<int>(std::ceil(std::log2(a / scale))));
    while (a > scale * std::ldexp(1.0, r)) ++r;
    while (r > 1 && a <= scale * std::ldexp(1.0, r - 1)) --r;
    if (static_cast<size_t>(r) >= counts.size()) counts.resize(r + 1, 0);
    ++counts[r];
  }
  return counts;
}

struct SpansofcompFamily {
  std::vector<Vector> ys;
  Vector norms;           // ||y_i||_P
  double mean_sign_norm;  // exact E_sigma ||beta^sigma||_1
};

struct SpansofcompReport {
  std::vector<SpansofcompFamily> families;
  double floor = 0.0;      // C_floor * k^{-1/9}
  double threshold = 0.0;  // k^{1/8}
};

// Desk-scale probe of the comparable-norms proposition: sample unit-direction
// families passing the norm floor, then evaluate the exact sign average of
// the polytope norm against k^{1/8}.
inline SpansofcompReport spansofcomp_probe(const Ensemble& e, int k, double c_floor,
                                           long families, long retry_cap = 200) {
  if (k < 1 || k > 16)
    throw PreconditionError("spansofcomp_probe: k must lie in 1..16 (one LP per sigma)");
  if (families < 1) throw PreconditionError("spansofcomp_probe: need at least one family");
  const PolytopeNorm solver(e);
  rng::Stream st(rng::derive_seed(e.config.seed, stream_id::kSpansofcomp));
  SpansofcompReport rep;
  rep.floor = c_floor * std::pow(static_cast<double>(k), -1.0 / 9.0);
  rep.threshold = std::pow(static_cast<double>(k), 0.125);

  for (long fam = 0; fam < families; ++fam) {
    SpansofcompFamily family;
    double best_rejected = 0.0;  // largest norm that still missed the floor
    long tries = 0;
    while (static_cast<int>(family.ys.size()) < k) {
      if (++tries > retry_cap + k)
        throw PreconditionError(
            "spansofcomp_probe: retry cap exhausted before the norm floor was met "
            "(best rejected norm " + std::to_string(best_rejected) + " vs floor " +
            std::to_string(rep.floor) + ")");
      Vector y(e.n());
      for (auto& v : y) v = st.normal();
      const double n2 = norm2(y);
      if (n2 < 1e-12) continue;
      for (auto& v : y) v /= n2;
      const double np = solver.solve(y).value;
      if (np >= rep.floor) {
        family.ys.push_back(y);
        family.norms.push_back(np);
      } else {
        best_rejected = std::max(best_rejected, np);
      }
    }
    NormOracle oracle{"polytope", e.n(),
                      [&solver](const Vector& x) { return solver.solve(x).value; }};
    family.mean_sign_norm = avg_sign_norm(oracle, family.ys, SignMode::Exact).mean;
    rep.families.push_back(std::move(family));
  }
  return rep;
}

}  // namespace gplab
