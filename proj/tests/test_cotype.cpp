#include <gtest/gtest.h>

#include <memory>

#include "gplab/cotype.hpp"
#include "oracles.hpp"

using namespace gplab;

namespace {

std::vector<Vector> standard_basis(int k) {
  std::vector<Vector> ys;
  for (int i = 0; i < k; ++i) {
    Vector v(k, 0.0);
    v[i] = 1.0;
    ys.push_back(v);
  }
  return ys;
}

std::vector<Vector> random_units(int k, int n, std::uint64_t seed) {
  rng::Stream st(seed);
  std::vector<Vector> ys;
  for (int i = 0; i < k; ++i) {
    Vector v(n);
    for (auto& x : v) x = st.normal();
    const double nn = norm2(v);
    for (auto& x : v) x /= nn;
    ys.push_back(v);
  }
  return ys;
}

}  // namespace

TEST(AvgSignNorm, SmallFamilies) {
  const NormOracle euc = euclidean_oracle(3);
  const Vector y = {0.5, -1.0, 2.0};
  EXPECT_NEAR(avg_sign_norm(euc, {y}, SignMode::Exact).mean, norm2(y), 1e-14);
  // duplicated vector: signs agree half the time, ||2y||/2 = ||y||
  EXPECT_NEAR(avg_sign_norm(euc, {y, y}, SignMode::Exact).mean, norm2(y), 1e-14);
  EXPECT_EQ(avg_sign_norm(euc, {y}, SignMode::Exact).stderr_, 0.0);
}

TEST(AvgSignNorm, ParallelogramIdentityForSquaredMeans) {
  // mean of squares over exact enumeration equals sum ||y_i||^2 to 1e-12
  const auto ys = random_units(6, 5, 11);
  double direct = oracles::full_sign_mean(ys, [](const Vector& s) { return dot(s, s); });
  double expect = 0.0;
  for (const auto& y : ys) expect += dot(y, y);
  EXPECT_NEAR(direct, expect, 1e-12);
}

TEST(AvgSignNorm, MatchesBinaryOrderEnumeration) {
  const NormOracle sup = sup_oracle(4);
  const auto ys = random_units(5, 4, 3);
  const double lib = avg_sign_norm(sup, ys, SignMode::Exact).mean;
  const double oracle = oracles::full_sign_mean(ys, [&](const Vector& s) { return sup(s); });
  EXPECT_NEAR(lib, oracle, 1e-13);
}

TEST(AvgSignNorm, JensenFloorProperty) {
  const Ensemble e = sample_ensemble({.n = 8, .N = 16, .seed = 5});
  const auto solver = std::make_shared<const PolytopeNorm>(e);
  const NormOracle poly = polytope_oracle(solver);
  rng::Stream st(17);
  for (int trial = 0; trial < 15; ++trial) {
    const int k = 1 + st.below(6);
    const auto ys = random_units(k, 8, st.u64());
    double floor = 0.0;
    for (const auto& y : ys) floor = std::max(floor, poly(y));
    EXPECT_GE(avg_sign_norm(poly, ys, SignMode::Exact).mean, floor - 1e-9);
  }
}

TEST(AvgSignNorm, ExactAndMonteCarloAgree) {
  const NormOracle euc = euclidean_oracle(6);
  const auto ys = random_units(9, 6, 29);
  const SignAverage exact = avg_sign_norm(euc, ys, SignMode::Exact);
  const SignAverage mc = avg_sign_norm(euc, ys, SignMode::MonteCarlo, 100000, 7);
  EXPECT_GT(mc.stderr_, 0.0);
  EXPECT_NEAR(exact.mean, mc.mean, 4.0 * mc.stderr_);
  EXPECT_THROW(avg_sign_norm(euc, random_units(21, 6, 1), SignMode::Exact),
               PreconditionError);
}

TEST(CotypeConstant, EuclideanIsExactlyOne) {
  const NormOracle euc = euclidean_oracle(7);
  rng::Stream st(43);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Vector> ys;
    const int k = 2 + st.below(6);
    for (int i = 0; i < k; ++i) {
      Vector v(7);
      for (auto& x : v) x = st.normal();
      ys.push_back(v);
    }
    EXPECT_NEAR(cotype_constant(euc, ys, 2.0, SignMode::Exact).constant, 1.0, 1e-12);
  }
}

TEST(CotypeConstant, SupNormBasisFamily) {
  for (int k : {2, 4, 8}) {
    for (double q : {2.0, 4.0}) {
      const CotypeEstimate est =
          cotype_constant(sup_oracle(k), standard_basis(k), q, SignMode::Exact);
      EXPECT_NEAR(est.constant, std::pow(static_cast<double>(k), 1.0 / q), 1e-9);
    }
  }
}

TEST(CotypeConstant, PolytopeFamilyMatchesIndependentEnumeration) {
  const Ensemble e = sample_ensemble({.n = 6, .N = 12, .seed = 9});
  const auto solver = std::make_shared<const PolytopeNorm>(e);
  const NormOracle poly = polytope_oracle(solver);
  const auto ys = random_units(8, 6, 31);
  const double q = 3.0;
  const CotypeEstimate est = cotype_constant(poly, ys, q, SignMode::Exact);
  double num = 0.0;
  for (const auto& y : ys) num += std::pow(poly(y), q);
  const double den =
      oracles::full_sign_mean(ys, [&](const Vector& s) { return std::pow(poly(s), q); });
  EXPECT_NEAR(est.constant, std::pow(num / den, 1.0 / q), 1e-10);
}

TEST(CotypeConstant, ScaleInvarianceAndErrors) {
  const NormOracle sup = sup_oracle(5);
  const auto ys = random_units(4, 5, 77);
  const double c1 = cotype_constant(sup, ys, 2.5, SignMode::Exact).constant;
  std::vector<Vector> scaled_ys;
  for (const auto& y : ys) scaled_ys.push_back(scaled(y, 37.5));
  const double c2 = cotype_constant(sup, scaled_ys, 2.5, SignMode::Exact).constant;
  EXPECT_NEAR(c1, c2, 1e-9 * c1);

  EXPECT_THROW(cotype_constant(sup, ys, 1.5, SignMode::Exact), PreconditionError);
  std::vector<Vector> zeros(3, Vector(5, 0.0));
  EXPECT_THROW(cotype_constant(sup, zeros, 2.0, SignMode::Exact), PreconditionError);
}

TEST(CotypeConstant, SingletonForcesOne) {
  const NormOracle sup = sup_oracle(3);
  const CotypeEstimate est =
      cotype_constant(sup, {Vector{0.2, -0.4, 1.0}}, 2.0, SignMode::Exact);
  EXPECT_NEAR(est.constant, 1.0, 1e-12);
}

TEST(DyadicBands, OrthonormalAndRepeatedFamilies) {
  const auto basis = standard_basis(4);
  const DyadicBands bands = dyadic_bands(basis);
  ASSERT_EQ(bands.bands.size(), 1u);
  EXPECT_EQ(bands.bands.begin()->first, -1);  // eigenvalue 1 in (1/2, 1]
  EXPECT_EQ(bands.bands.begin()->second.dim(), 4);

  Vector y = {1.0, 0.0, 0.0};
  const DyadicBands rep = dyadic_bands({y, y});
  ASSERT_EQ(rep.bands.size(), 1u);
  EXPECT_EQ(rep.bands.begin()->first, 0);  // eigenvalue 2 in (1, 2]
  EXPECT_EQ(rep.bands.begin()->second.dim(), 1);
  EXPECT_EQ(rep.rank, 1);
}

TEST(DyadicBands, TraceAndRankInvariants) {
  const auto ys = random_units(6, 9, 4);
  const DyadicBands b = dyadic_bands(ys);
  int dims = 0;
  double lower = 0.0, upper = 0.0;
  for (const auto& [p, band] : b.bands) {
    dims += band.dim();
    lower += std::ldexp(1.0, p) * band.dim();
    upper += std::ldexp(1.0, p + 1) * band.dim();
  }
  EXPECT_EQ(dims, b.rank);
  double trace = 0.0;
  for (int i = 0; i < 9; ++i) trace += b.covariance(i, i);
  EXPECT_NEAR(trace, 6.0, 1e-9);  // sum of ||y_i||^2
  EXPECT_LE(lower, trace + 1e-9);
  EXPECT_GE(upper, trace - 1e-9);
  EXPECT_THROW(dyadic_bands({Vector{2.0, 0.0}}), PreconditionError);
}

TEST(DyadDecompCheck, OrthogonalZNeverTriggers) {
  const auto ys = standard_basis(4);  // span = R^4 x {0...} inside R^6
  std::vector<Vector> lifted;
  for (const auto& y : ys) {
    Vector v(6, 0.0);
    for (int i = 0; i < 4; ++i) v[i] = y[i];
    lifted.push_back(v);
  }
  Vector z(6, 0.0);
  z[5] = 3.0;  // orthogonal to every y_i
  for (double t : {1.0, 2.0, 10.0})
    EXPECT_FALSE(dyaddecomp_check(lifted, z, t).hypothesis_holds);
}

TEST(DyadDecompCheck, AlignedZTriggersAlternativeA) {
  // k = 2 hand trace: Z = t sqrt(k) y_1, so |<Z, sum sigma y>| = t sqrt(2) always
  const auto ys = standard_basis(2);
  const double t = 3.0;
  Vector z = scaled(ys[0], t * std::sqrt(2.0));
  const DyadDecompVerdict v = dyaddecomp_check(ys, z, t, 0.01);
  EXPECT_TRUE(v.hypothesis_holds);
  EXPECT_NEAR(v.tail_probability, 1.0, 1e-15);
  EXPECT_TRUE(v.alternative_a);
  // ||Proj(Z)|| = t sqrt(2), threshold = 0.01 t sqrt(2)/sqrt(log 2)
  EXPECT_NEAR(v.margin_a,
              t * std::sqrt(2.0) - 0.01 * t * std::sqrt(2.0) / std::sqrt(std::log(2.0)),
              1e-12);
}

TEST(DyadDecompCheck, HugeThresholdFailsByCauchySchwarz) {
  const auto ys = random_units(5, 8, 3);
  Vector z(8);
  rng::Stream st(1);
  for (auto& x : z) x = st.normal();
  const double cap = norm2(z) * 5.0;  // |<z, sum>| <= ||z|| * k always
  EXPECT_FALSE(dyaddecomp_check(ys, z, cap / std::sqrt(5.0) + 1.0).hypothesis_holds);
  EXPECT_THROW(dyaddecomp_check({ys[0]}, z, 1.0), PreconditionError);
}

TEST(JSet, EmptyAtHugeThresholds) {
  const Ensemble e = sample_ensemble({.n = 6, .N = 12, .seed = 3});
  const auto ys = random_units(3, 6, 8);
  EXPECT_TRUE(j_set(e, ys, 1e9).empty());
}

TEST(JSet, HandBuiltSpikeEntersViaConditionTwo) {
  // X_1 = k^6 (y_1 + y_2) with k = 2: max inner product 2 k^6 = 128;
  // with Ctilde = 0.05 the condition-(2) threshold is 0.05 * 2^11 = 102.4
  const int n = 4;
  std::vector<Vector> ys = {Vector{1, 0, 0, 0}, Vector{0, 1, 0, 0}};
  Matrix a(n, 4);
  a(0, 0) = 64.0;
  a(1, 0) = 64.0;
  a(1, 1) = 1.0;
  a(2, 2) = 1.0;
  a(3, 3) = 1.0;
  const Ensemble e{a, {.n = n, .N = 4, .seed = 0}};
  const double t = 1000.0;  // condition (1) unreachable: t sqrt(2) = 1414 > 128
  const std::vector<int> j = j_set(e, ys, t, std::nullopt, 0.05);
  const std::vector<int> expect = {0};
  EXPECT_EQ(j, expect);
  EXPECT_TRUE(j_set(e, ys, t, std::nullopt, 1.0).empty());  // default threshold 2048
}

TEST(JSet, MonotoneInT) {
  const Ensemble e = sample_ensemble({.n = 8, .N = 16, .seed = 12});
  const auto ys = random_units(4, 8, 21);
  const auto j_small = j_set(e, ys, 1.0, 0.25);
  const auto j_big = j_set(e, ys, 2.0, 0.25);
  for (int j : j_big)
    EXPECT_NE(std::find(j_small.begin(), j_small.end(), j), j_small.end());
}

TEST(MDeltaHistogram, HandBucketsAndSumInvariant) {
  const int n = 10;
  const double delta = 0.5;
  const double scale = delta / n;
  CoefficientVector beta;
  beta.beta = {scale * 0.5, scale * 1.5, scale * 3.0, scale * 100.0};
  beta.l1 = 0.0;
  const std::vector<long> h = m_delta_histogram(beta, delta, n);
  ASSERT_EQ(h.size(), 8u);
  EXPECT_EQ(h[0], 1);
  EXPECT_EQ(h[1], 1);
  EXPECT_EQ(h[2], 1);
  EXPECT_EQ(h[7], 1);

  CoefficientVector zero;
  zero.beta = Vector(6, 0.0);
  const std::vector<long> hz = m_delta_histogram(zero, 0.25, n);
  EXPECT_EQ(hz[0], 6);

  // random beta: counts reproduce a direct scalar loop and sum to N
  rng::Stream st(5);
  CoefficientVector r;
  r.beta.resize(40);
  for (auto& v : r.beta) v = st.normal() * 0.1;
  const std::vector<long> hr = m_delta_histogram(r, 0.3, n);
  long total = 0;
  for (long c : hr) total += c;
  EXPECT_EQ(total, 40);
  long bucket0 = 0;
  for (double v : r.beta)
    if (std::fabs(v) <= 0.3 / n) ++bucket0;
  EXPECT_EQ(hr[0], bucket0);
  for (size_t rr = 1; rr < hr.size(); ++rr) {
    long direct = 0;
    for (double v : r.beta) {
      const double a = std::fabs(v);
      if (a > 0.3 / n * std::ldexp(1.0, rr - 1) && a <= 0.3 / n * std::ldexp(1.0, rr))
        ++direct;
    }
    EXPECT_EQ(hr[rr], direct) << "bucket " << rr;
  }
}

TEST(Spansofcomp, SmallProbeRunsAndFiltersHonestly) {
  const Ensemble e = sample_ensemble({.n = 20, .N = 40, .seed = 71});
  const SpansofcompReport rep = spansofcomp_probe(e, 4, 1.0, 2);
  ASSERT_EQ(rep.families.size(), 2u);
  for (const auto& fam : rep.families) {
    ASSERT_EQ(fam.ys.size(), 4u);
    for (double np : fam.norms) EXPECT_GE(np, rep.floor);
    EXPECT_GT(fam.mean_sign_norm, 0.0);
  }
  // an impossible floor exhausts the retry cap
  EXPECT_THROW(spansofcomp_probe(e, 2, 100.0, 1, 30), PreconditionError);
}

TEST(LqDirectSum, HandValues) {
  EXPECT_NEAR(lq_direct_sum_norm({3.0, 4.0}, 2.0), 5.0, 1e-12);
  EXPECT_NEAR(lq_direct_sum_norm({7.5}, 3.7), 7.5, 1e-12);
  EXPECT_NEAR(lq_direct_sum_norm({1.0, 1.0, 1.0}, 1.0), 3.0, 1e-12);
  EXPECT_THROW(lq_direct_sum_norm({-1.0}, 2.0), PreconditionError);
  EXPECT_THROW(lq_direct_sum_norm({1.0}, 0.5), PreconditionError);
}

TEST(LqSumOracle, DirectSumCotypeIsBoundedByComponents) {
  // two small polytope spaces; the concatenated family's constant obeys
  // the l_q-sum computation: <= max(C1, C2)
  const Ensemble e1 = sample_ensemble({.n = 4, .N = 8, .seed = 81});
  const Ensemble e2 = sample_ensemble({.n = 5, .N = 10, .seed = 82});
  const auto s1 = std::make_shared<const PolytopeNorm>(e1);
  const auto s2 = std::make_shared<const PolytopeNorm>(e2);
  const NormOracle p1 = polytope_oracle(s1);
  const NormOracle p2 = polytope_oracle(s2);
  const double q = 2.0;
  const NormOracle sum = lq_sum_oracle({p1, p2}, q);

  const auto f1 = random_units(3, 4, 91);
  const auto f2 = random_units(3, 5, 92);
  const double c1 = cotype_constant(p1, f1, q, SignMode::Exact).constant;
  const double c2 = cotype_constant(p2, f2, q, SignMode::Exact).constant;

  std::vector<Vector> joint;
  for (const auto& y : f1) {
    Vector v(9, 0.0);
    for (int i = 0; i < 4; ++i) v[i] = y[i];
    joint.push_back(v);
  }
  for (const auto& y : f2) {
    Vector v(9, 0.0);
    for (int i = 0; i < 5; ++i) v[4 + i] = y[i];
    joint.push_back(v);
  }
  const double cj = cotype_constant(sum, joint, q, SignMode::Exact).constant;
  EXPECT_LE(cj, std::max(c1, c2) + 1e-9);
}

TEST(AvgSignNorm, ExactMcConsistencyAcrossInstances) {
  // the MC estimate at 10^5 trials stays within 4 stderr of exact mode
  int within = 0;
  const int instances = 20;
  for (int inst = 0; inst < instances; ++inst) {
    const int k = 2 + inst % 11;
    const auto ys = random_units(k, 6, 6000 + inst);
    const NormOracle euc = euclidean_oracle(6);
    const SignAverage exact = avg_sign_norm(euc, ys, SignMode::Exact);
    const SignAverage mc = avg_sign_norm(euc, ys, SignMode::MonteCarlo, 100000, inst);
    if (std::fabs(exact.mean - mc.mean) <= 4.0 * mc.stderr_) ++within;
  }
  EXPECT_GE(within, instances - 1);
}
