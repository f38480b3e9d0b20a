#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gplab/ensemble.hpp"
#include "gplab/errors.hpp"
#include "gplab/l1norm.hpp"
#include "gplab/matrix.hpp"
#include "gplab/numerics.hpp"
#include "gplab/rng.hpp"

// In-radius bounds, compressibility distances, the singular-value event, the
// kernel incompressibility scan and the A^T A ~ n Id residual diagnostics.

namespace gplab {

// internal stream ids for ops that sample (derived from the ensemble seed)
namespace stream_id {
inline constexpr std::uint64_t kInradius = 101;
inline constexpr std::uint64_t kKernelScan = 102;
inline constexpr std::uint64_t kEventSubsets = 103;
inline constexpr std::uint64_t kRelativeInradius = 104;
}  // namespace stream_id

// h_P(y) = max_j |<X_j, y>| = ||A^T y||_inf
inline double support_function(const Ensemble& e, const Vector& y) {
  return norm_inf(matvec_t(e.A, y));
}

namespace detail {

inline double support_inf(const Matrix& a, const Vector& y) {
  return norm_inf(matvec_t(a, y));
}

inline Vector random_unit(rng::Stream& st, int n) {
  Vector v(n);
  double s = 0.0;
  while (s < 1e-12) {
    for (auto& x : v) x = st.normal();
    s = norm2(v);
  }
  for (auto& x : v) x /= s;
  return v;
}

// min over sampled + locally descended unit directions of max_j |<a_j, y>|;
// every evaluated direction certifies an upper bound on the in-radius.
inline double sampled_support_min(const Matrix& a, long budget, rng::Stream st) {
  const int n = a.rows;
  if (budget < 1) throw PreconditionError("inradius_upper: budget must be >= 1");
  long sample_budget = std::max<long>(1, (3 * budget) / 4);
  long descent_budget = budget - sample_budget;
  Vector best_dir;
  double best = std::numeric_limits<double>::infinity();
  for (long s = 0; s < sample_budget; ++s) {
    Vector y = random_unit(st, n);
    const double h = support_inf(a, y);
    if (h < best) {
      best = h;
      best_dir = y;
    }
  }
  // subgradient descent on max_j |<a_j, y>| over the sphere
  double step = 0.2;
  Vector y = best_dir;
  while (descent_budget > 0) {
    int arg = 0;
    Vector g = matvec_t(a, y);
    for (int j = 1; j < a.cols; ++j)
      if (std::fabs(g[j]) > std::fabs(g[arg])) arg = j;
    Vector cand = y;
    const double sgn = g[arg] >= 0 ? 1.0 : -1.0;
    Vector aj(a.rows);
    for (int i = 0; i < a.rows; ++i) aj[i] = a(i, arg);
    const double ajn = norm2(aj);
    if (ajn < 1e-300) break;
    axpy(-sgn * step / ajn, aj, cand);
    const double cn = norm2(cand);
    if (cn < 1e-12) break;
    for (auto& x : cand) x /= cn;
    const double h = support_inf(a, cand);
    --descent_budget;
    if (h < best) {
      best = h;
      y = cand;
    } else {
      step *= 0.7;
      if (step < 1e-12) break;
    }
  }
  return best;
}

}  // namespace detail

// Spectral lower bound s_min(A^T)/sqrt(N); never exceeds the true in-radius.
inline double inradius_lower(const Ensemble& e) {
  const Vector sv = singular_values(e.A);
  if (numeric_rank(sv) < e.n())
    throw PreconditionError("inradius_lower: A is rank deficient");
  return sv.back() / std::sqrt(static_cast<double>(e.N()));
}

inline double inradius_upper(const Ensemble& e, long budget) {
  rng::Stream st(rng::derive_seed(e.config.seed, stream_id::kInradius));
  return detail::sampled_support_min(e.A, budget, st);
}

// Two-sided bounds for the relative in-radius of conv{±X_j, j in I} inside
// its own span.
inline std::pair<double, double> relative_inradius_bounds(const Ensemble& e,
                                                          const std::vector<int>& index_set,
                                                          long budget = 20000) {
  if (index_set.empty()) throw PreconditionError("relative_inradius_bounds: empty index set");
  std::vector<Vector> cols;
  for (int j : index_set) {
    if (j < 0 || j >= e.N())
      throw PreconditionError("relative_inradius_bounds: index out of range");
    cols.push_back(e.A.col(j));
  }
  const Subspace span = orthonormal_basis(cols);
  // coordinates of the chosen columns inside their span
  Matrix c(span.dim(), static_cast<int>(cols.size()));
  for (size_t j = 0; j < cols.size(); ++j) {
    const Vector v = matvec_t(span.basis, cols[j]);
    c.set_col(static_cast<int>(j), v);
  }
  const Vector sv = singular_values(c);
  const double lower = sv.back() / std::sqrt(static_cast<double>(cols.size()));
  if (span.dim() == 1) {
    // a segment: both bounds equal the longest generator inside the span
    double len = 0.0;
    for (int j = 0; j < c.cols; ++j) len = std::max(len, std::fabs(c(0, j)));
    return {lower, len};
  }
  std::uint64_t tag = stream_id::kRelativeInradius;
  for (int j : index_set) tag = rng::mix64(tag ^ static_cast<std::uint64_t>(j + 1));
  rng::Stream st(rng::derive_seed(e.config.seed, tag));
  return {lower, detail::sampled_support_min(c, budget, st)};
}

// Euclidean distance from beta (normalized) to the set of ceil(delta N)-sparse
// vectors: the l2 mass outside the top magnitudes.
inline double compressibility_distance(Vector beta, double delta) {
  if (beta.empty()) throw PreconditionError("compressibility_distance: empty vector");
  if (!(delta > 0.0 && delta < 1.0))
    throw PreconditionError("compressibility_distance: delta must lie in (0,1)");
  const double nrm = norm2(beta);
  if (nrm < 1e-300) throw PreconditionError("compressibility_distance: zero vector");
  for (auto& v : beta) v = std::fabs(v) / nrm;
  const int n_entries = static_cast<int>(beta.size());
  int keep = static_cast<int>(std::ceil(delta * n_entries - 1e-9));
  keep = std::clamp(keep, 1, n_entries);
  std::nth_element(beta.begin(), beta.begin() + (keep - 1), beta.end(),
                   std::greater<double>());
  double tail = 0.0;
  for (int i = keep; i < n_entries; ++i) tail += beta[i] * beta[i];
  return std::sqrt(tail);
}

struct KernelScanReport {
  double min_distance = 0.0;       // over all probes (random + adversarial)
  long violations = 0;             // probes with distance < rho
  long random_trials = 0;
  long adversarial_trials = 0;
  double random_min = 0.0;
  double adversarial_min = 0.0;
};

// Random + adversarial search for compressible unit vectors in ker(A).
// Random pass: uniform directions in the kernel. Adversarial pass: for
// sampled supports S of size ceil(delta N), the kernel vector maximizing the
// mass on S (top right-singular vector of the kernel-basis rows over S).
inline KernelScanReport kernel_incompressibility_scan(const Ensemble& e, double delta,
                                                      double rho, long trials,
                                                      long adversarial = -1) {
  if (e.N() <= e.n())
    throw PreconditionError("kernel scan: trivial kernel (N must exceed n)");
  if (trials < 1) throw PreconditionError("kernel scan: trials must be >= 1");
  const Subspace ker = kernel_basis(e.A);
  const int kd = ker.dim();
  const int n_entries = e.N();
  int keep = static_cast<int>(std::ceil(delta * n_entries - 1e-9));
  keep = std::clamp(keep, 1, n_entries);
  if (adversarial < 0) adversarial = std::min<long>(trials, 500);

  rng::Stream st(rng::derive_seed(e.config.seed, stream_id::kKernelScan));
  KernelScanReport rep;
  rep.random_trials = trials;
  rep.adversarial_trials = adversarial;
  rep.random_min = std::numeric_limits<double>::infinity();
  rep.adversarial_min = std::numeric_limits<double>::infinity();

  for (long t = 0; t < trials; ++t) {
    Vector g(kd);
    for (auto& x : g) x = st.normal();
    const Vector v = matvec(ker.basis, g);
    const double d = compressibility_distance(v, delta);
    rep.random_min = std::min(rep.random_min, d);
    if (d < rho) ++rep.violations;
  }

  std::vector<int> idx(n_entries);
  for (long t = 0; t < adversarial; ++t) {
    std::iota(idx.begin(), idx.end(), 0);
    for (int i = 0; i < keep; ++i) std::swap(idx[i], idx[i + st.below(n_entries - i)]);
    Matrix rows(keep, kd);
    for (int r = 0; r < keep; ++r)
      for (int c2 = 0; c2 < kd; ++c2) rows(r, c2) = ker.basis(idx[r], c2);
    const SvdResult s = svd(rows, true);
    // top right-singular vector = kernel coordinates of the most S-aligned direction
    Vector g(kd);
    for (int i = 0; i < kd; ++i) g[i] = s.v(i, 0);
    const Vector v = matvec(ker.basis, g);
    const double d = compressibility_distance(v, delta);
    rep.adversarial_min = std::min(rep.adversarial_min, d);
    if (d < rho) ++rep.violations;
  }
  rep.min_distance = std::min(rep.random_min, rep.adversarial_min);
  return rep;
}

struct EventCondition {
  std::string name;
  bool holds = false;
  double margin = 0.0;
};

struct EventReport {
  std::vector<EventCondition> conditions;
  std::map<std::string, double> constants_used;
  long subsets_inspected = 0;
  bool subsets_exhaustive = true;

  bool all_hold() const {
    for (const auto& c : conditions)
      if (!c.holds) return false;
    return true;
  }
};

// The three sub-conditions of the sparse singular-value event:
//   (1) ||A|| <= 4 sqrt(N)
//   (2) s_min(A^T) >= (sqrt(N) - sqrt(n))/2
//   (3) for every nonempty J, |J| <= c n:
//       sqrt(n) (1 -+ sqrt(|J|/n) log(n/|J|)) brackets s_min/s_max(A_J)
// Subsets are enumerated exhaustively when their count fits in subset_budget,
// otherwise subset_budget subsets are sampled uniformly per admissible size.
inline EventReport event_sparse_singular(const Ensemble& e, double c, long subset_budget) {
  if (!(c > 0.0 && c <= 0.01))
    throw PreconditionError("event_sparse_singular: c must lie in (0, 1/100]");
  if (subset_budget < 1) throw PreconditionError("event_sparse_singular: budget >= 1");
  const int n = e.n(), bign = e.N();
  const Vector sv = singular_values(e.A);

  EventReport rep;
  rep.constants_used["c"] = c;
  rep.constants_used["subset_budget"] = static_cast<double>(subset_budget);

  const double m1 = 4.0 * std::sqrt(static_cast<double>(bign)) - sv.front();
  rep.conditions.push_back({"spectral_norm", m1 >= 0.0, m1});
  const double m2 = sv.back() - 0.5 * (std::sqrt(static_cast<double>(bign)) -
                                       std::sqrt(static_cast<double>(n)));
  rep.conditions.push_back({"smin_transpose", m2 >= 0.0, m2});

  const int max_size = static_cast<int>(std::floor(c * n + 1e-12));
  if (max_size < 1) {
    // no nonempty subsets admissible: vacuous
    rep.conditions.push_back({"sparse_subsets", true,
                              std::numeric_limits<double>::infinity()});
    return rep;
  }

  // count subsets of size 1..max_size, saturating
  double total = 0.0;
  for (int s = 1; s <= max_size && total <= 2.0 * subset_budget; ++s) {
    double binom = 1.0;
    for (int i = 0; i < s; ++i) binom *= static_cast<double>(bign - i) / (i + 1);
    total += binom;
  }
  rep.subsets_exhaustive = total <= static_cast<double>(subset_budget);

  double margin = std::numeric_limits<double>::infinity();
  auto inspect = [&](const std::vector<int>& subset) {
    const int sz = static_cast<int>(subset.size());
    Matrix aj(n, sz);
    for (int j = 0; j < sz; ++j) aj.set_col(j, e.A.col(subset[j]));
    const Vector s = singular_values(aj);
    const double band = std::sqrt(static_cast<double>(sz) / n) *
                        std::log(static_cast<double>(n) / sz);
    const double lo = std::sqrt(static_cast<double>(n)) * (1.0 - band);
    const double hi = std::sqrt(static_cast<double>(n)) * (1.0 + band);
    margin = std::min(margin, std::min(s.back() - lo, hi - s.front()));
    ++rep.subsets_inspected;
  };

  if (rep.subsets_exhaustive) {
    std::vector<int> subset;
    for (int s = 1; s <= max_size; ++s) {
      subset.assign(s, 0);
      std::iota(subset.begin(), subset.end(), 0);
      while (true) {
        inspect(subset);
        int i = s - 1;
        while (i >= 0 && subset[i] == bign - s + i) --i;
        if (i < 0) break;
        ++subset[i];
        for (int j = i + 1; j < s; ++j) subset[j] = subset[j - 1] + 1;
      }
    }
  } else {
    rng::Stream st(rng::derive_seed(e.config.seed, stream_id::kEventSubsets));
    std::vector<int> idx(bign);
    for (long t = 0; t < subset_budget; ++t) {
      const int s = 1 + st.below(max_size);
      std::iota(idx.begin(), idx.end(), 0);
      for (int i = 0; i < s; ++i) std::swap(idx[i], idx[i + st.below(bign - i)]);
      inspect(std::vector<int>(idx.begin(), idx.begin() + s));
    }
  }
  rep.conditions.push_back({"sparse_subsets", margin >= 0.0, margin});
  return rep;
}

// one JSON record per (seed, condition), the CLI aggregator's wire format
inline nlohmann::json event_report_records(std::uint64_t seed, const EventReport& rep) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& c : rep.conditions)
    out.push_back({{"seed", seed},
                   {"condition", c.name},
                   {"holds", c.holds},
                   {"margin", c.margin}});
  return out;
}

struct ApproxResidual {
  double residual = 0.0;
  double bound = 0.0;
};

// With Z = A beta: residual of (<X_l, Z>)_{l in T} against n beta_T, and the
// bound C1 n ||beta_T|| log(n/|T|) sqrt(|T|/n) + 16 N ||beta_{T^c}||.
inline ApproxResidual approx_residual(const Ensemble& e, const Vector& beta,
                                      const std::vector<int>& t_set, double c1 = 1.0,
                                      double max_fraction = 0.5) {
  if (t_set.empty()) throw PreconditionError("approx_residual: empty index set");
  if (static_cast<int>(beta.size()) != e.N())
    throw PreconditionError("approx_residual: beta has wrong length");
  if (static_cast<double>(t_set.size()) > max_fraction * e.n())
    throw PreconditionError("approx_residual: |T| exceeds the configured fraction of n");
  const Vector z = matvec(e.A, beta);
  const Vector az = matvec_t(e.A, z);
  double res = 0.0, bt = 0.0, btc = 0.0;
  std::vector<bool> in_t(e.N(), false);
  for (int j : t_set) {
    if (j < 0 || j >= e.N()) throw PreconditionError("approx_residual: index out of range");
    in_t[j] = true;
    const double d = az[j] - e.n() * beta[j];
    res += d * d;
    bt += beta[j] * beta[j];
  }
  for (int j = 0; j < e.N(); ++j)
    if (!in_t[j]) btc += beta[j] * beta[j];
  ApproxResidual out;
  out.residual = std::sqrt(res);
  const double tsz = static_cast<double>(t_set.size());
  out.bound = c1 * e.n() * std::sqrt(bt) * std::log(e.n() / tsz) *
                        std::sqrt(tsz / e.n()) +
                    16.0 * e.N() * std::sqrt(btc);
  return out;
}

// T^sigma(tau): indices with |beta_j| >= tau
inline std::vector<int> t_sigma_set(const CoefficientVector& beta, double tau) {
  if (!(tau > 0.0)) throw PreconditionError("t_sigma_set: tau must be positive");
  std::vector<int> out;
  for (size_t j = 0; j < beta.beta.size(); ++j)
    if (std::fabs(beta.beta[j]) >= tau) out.push_back(static_cast<int>(j));
  return out;
}

}  // namespace gplab
