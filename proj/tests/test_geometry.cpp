#include <gtest/gtest.h>

#include "gplab/geometry.hpp"
#include "oracles.hpp"

using namespace gplab;

namespace {

Ensemble identity_ensemble(int n) {
  return Ensemble{Matrix::identity(n), {.n = n, .N = n, .seed = 0}};
}

}  // namespace

TEST(SupportFunction, Basics) {
  const Ensemble e = identity_ensemble(2);
  EXPECT_NEAR(support_function(e, {0.6, 0.8}), 0.8, 1e-15);
  EXPECT_EQ(support_function(e, {0.0, 0.0}), 0.0);

  const Ensemble g = sample_ensemble({.n = 4, .N = 9, .seed = 2});
  Vector y = {1.0, -2.0, 0.5, 0.25};
  EXPECT_EQ(support_function(g, y), norm_inf(matvec_t(g.A, y)));
}

TEST(Inradius, CrossPolytopeLowerBoundIsTight) {
  EXPECT_NEAR(inradius_lower(identity_ensemble(2)), 1.0 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(inradius_lower(identity_ensemble(5)), 1.0 / std::sqrt(5.0), 1e-12);
}

TEST(Inradius, UpperConvergesAndSandwiches) {
  const Ensemble e2 = identity_ensemble(2);
  const double up = inradius_upper(e2, 10000);
  EXPECT_NEAR(up, 1.0 / std::sqrt(2.0), 0.01 / std::sqrt(2.0));  // within 1%
  EXPECT_GE(up, inradius_lower(e2) - 1e-9);

  EXPECT_GE(inradius_upper(e2, 1), inradius_lower(e2) - 1e-9);  // loose but valid

  const Ensemble g = sample_ensemble({.n = 3, .N = 6, .seed = 77});
  const double lo = inradius_lower(g);
  const double hi = inradius_upper(g, 20000);
  EXPECT_LE(lo, hi + 1e-12);
  // the sampling oracle can only tighten the upper bound
  EXPECT_LE(lo, oracles::sphere_support_min(g.A, 100000, 5) + 1e-9);
}

TEST(RelativeInradius, SingleGeneratorIsASegment) {
  const Ensemble g = sample_ensemble({.n = 4, .N = 8, .seed = 10});
  const auto [lo, hi] = relative_inradius_bounds(g, {3});
  const double len = norm2(g.A.col(3));
  EXPECT_NEAR(lo, len, 1e-10);
  EXPECT_NEAR(hi, len, 1e-10);
}

TEST(RelativeInradius, ScaledIdentityBracketsOne) {
  const int n = 4;
  Matrix a(n, n);
  for (int i = 0; i < n; ++i) a(i, i) = std::sqrt(static_cast<double>(n));
  const Ensemble e{a, {.n = n, .N = n, .seed = 0}};
  const auto [lo, hi] = relative_inradius_bounds(e, {0, 1, 2, 3});
  EXPECT_LE(lo, 1.0 + 1e-9);
  EXPECT_GE(hi, 1.0 - 1e-9);
  EXPECT_NEAR(lo, 1.0, 1e-9);  // sqrt(n) I has s_min / sqrt(n) = 1 exactly
}

TEST(RelativeInradius, RandomPairSandwich) {
  const Ensemble g = sample_ensemble({.n = 4, .N = 8, .seed = 3});
  const auto [lo, hi] = relative_inradius_bounds(g, {1, 6});
  EXPECT_LE(lo, hi + 1e-12);
  EXPECT_GT(lo, 0.0);
}

TEST(CompressibilityDistance, HandValuesAndOracle) {
  EXPECT_NEAR(compressibility_distance({0.5, 0.5, 0.5, 0.5}, 0.5), 1.0 / std::sqrt(2.0),
              1e-12);
  Vector e1(6, 0.0);
  e1[0] = 1.0;
  EXPECT_NEAR(compressibility_distance(e1, 0.3), 0.0, 1e-15);

  rng::Stream st(8);
  for (int trial = 0; trial < 20; ++trial) {
    Vector b(8);
    for (auto& v : b) v = st.normal();
    const double nn = norm2(b);
    for (auto& v : b) v /= nn;
    const double lib = compressibility_distance(b, 3.0 / 8.0);  // keep 3 of 8
    EXPECT_NEAR(lib, oracles::sparse_distance_exhaustive(b, 3), 1e-12);
  }
}

TEST(CompressibilityDistance, MonotoneInDeltaAndKeepClamp) {
  rng::Stream st(14);
  Vector b(10);
  for (auto& v : b) v = st.normal();
  double prev = 2.0;
  for (double delta : {0.05, 0.15, 0.35, 0.55, 0.95}) {
    const double d = compressibility_distance(b, delta);
    EXPECT_LE(d, prev + 1e-12);
    prev = d;
  }
  // delta N < 1 keeps one entry
  Vector two = {3.0, 4.0};
  EXPECT_NEAR(compressibility_distance(two, 0.05), 3.0 / 5.0, 1e-12);
}

TEST(KernelScan, SquareEnsembleHasTrivialKernel) {
  EXPECT_THROW(
      kernel_incompressibility_scan(identity_ensemble(4), 0.2, 0.1, 10),
      PreconditionError);
}

TEST(KernelScan, OneDimensionalKernelIsConstant) {
  const Ensemble e = sample_ensemble({.n = 5, .N = 6, .seed = 19});
  const KernelScanReport rep = kernel_incompressibility_scan(e, 0.2, 0.01, 50, 0);
  // every probe lands on the same line, so min == the common value
  const Subspace k = kernel_basis(e.A);
  ASSERT_EQ(k.dim(), 1);
  const double expect = compressibility_distance(k.basis.col(0), 0.2);
  EXPECT_NEAR(rep.random_min, expect, 1e-9);
  EXPECT_NEAR(rep.min_distance, expect, 1e-9);
}

TEST(KernelScan, ShadowInstanceMatchesExhaustiveOracle) {
  const Ensemble e = sample_ensemble({.n = 6, .N = 12, .seed = 33});
  const Subspace k = kernel_basis(e.A);
  rng::Stream st(41);
  const double delta = 0.25;  // keep 3 of 12
  for (int trial = 0; trial < 60; ++trial) {
    Vector g(k.dim());
    for (auto& v : g) v = st.normal();
    Vector v = matvec(k.basis, g);
    const double nn = norm2(v);
    for (auto& x : v) x /= nn;
    EXPECT_NEAR(compressibility_distance(v, delta),
                oracles::sparse_distance_exhaustive(v, 3), 1e-10);
  }
}

TEST(KernelScan, AdversarialPassFindsSparserDirections) {
  const Ensemble e = sample_ensemble({.n = 20, .N = 40, .seed = 50});
  const KernelScanReport rep = kernel_incompressibility_scan(e, 0.1, 0.05, 400, 200);
  EXPECT_LE(rep.adversarial_min, rep.random_min + 1e-12);
  EXPECT_GT(rep.min_distance, 0.0);
}

TEST(EventSparseSingular, ScaledIdentityArithmetic) {
  const int n = 100;
  Matrix a(n, n);
  for (int i = 0; i < n; ++i) a(i, i) = std::sqrt(static_cast<double>(n));
  const Ensemble e{a, {.n = n, .N = n, .seed = 0}};
  const EventReport rep = event_sparse_singular(e, 0.01, 1000);
  ASSERT_EQ(rep.conditions.size(), 3u);
  EXPECT_TRUE(rep.conditions[0].holds);  // sqrt(n) <= 4 sqrt(n)
  EXPECT_TRUE(rep.conditions[1].holds);  // s_min = sqrt(n) >= 0
  EXPECT_TRUE(rep.conditions[2].holds);  // singleton J: sqrt(n) inside the band
  EXPECT_TRUE(rep.subsets_exhaustive);
  EXPECT_EQ(rep.subsets_inspected, 100);
  EXPECT_TRUE(rep.all_hold());
}

TEST(EventSparseSingular, VacuousSubsetsAtSmallN) {
  // c n < 1: no nonempty subsets, condition 3 is vacuously true
  const Ensemble e = sample_ensemble({.n = 50, .N = 100, .seed = 7});
  const EventReport rep = event_sparse_singular(e, 0.01, 1000);
  EXPECT_TRUE(rep.conditions[2].holds);
  EXPECT_EQ(rep.subsets_inspected, 0);
}

TEST(EventSparseSingular, PreconditionAndMarginContinuity) {
  const Ensemble e = sample_ensemble({.n = 120, .N = 240, .seed = 21});
  EXPECT_THROW(event_sparse_singular(e, 0.2, 100), PreconditionError);

  const EventReport r1 = event_sparse_singular(e, 0.01, 300);
  Ensemble pert = e;
  pert.A(0, 0) += 1e-8;  // spectral perturbation of 1e-8
  const EventReport r2 = event_sparse_singular(pert, 0.01, 300);
  for (size_t i = 0; i < 2; ++i)
    EXPECT_NEAR(r1.conditions[i].margin, r2.conditions[i].margin, 1e-6);
}

TEST(ApproxResidual, OrthogonalColumnsAndZeroBeta) {
  const int n = 4;
  Matrix a(n, n);
  for (int i = 0; i < n; ++i) a(i, i) = std::sqrt(static_cast<double>(n));
  const Ensemble e{a, {.n = n, .N = n, .seed = 0}};
  Vector beta(n, 0.0);
  beta[0] = 1.0;
  const ApproxResidual r = approx_residual(e, beta, {0});
  EXPECT_NEAR(r.residual, 0.0, 1e-12);

  const ApproxResidual z = approx_residual(e, Vector(n, 0.0), {1});
  EXPECT_EQ(z.residual, 0.0);
  EXPECT_THROW(approx_residual(e, beta, {}), PreconditionError);
}

TEST(ApproxResidual, SupportedBetaMatchesDirectRecomputation) {
  const Ensemble e = sample_ensemble({.n = 30, .N = 60, .seed = 64});
  Vector beta(60, 0.0);
  beta[4] = 0.7;
  beta[9] = -0.2;
  const std::vector<int> t_set = {4, 9};
  const ApproxResidual r = approx_residual(e, beta, t_set);
  // beta supported on T: residual is ||(A_T^T A_T - n I) beta_T|| directly
  Matrix at(30, 2);
  at.set_col(0, e.A.col(4));
  at.set_col(1, e.A.col(9));
  const Matrix gram = matmul(transpose(at), at);
  Vector bt = {0.7, -0.2};
  Vector d = matvec(gram, bt);
  axpy(-static_cast<double>(e.n()), bt, d);
  EXPECT_NEAR(r.residual, norm2(d), 1e-9);
}

TEST(ApproxResidual, BoundHoldsOnMostGaussianTrials) {
  // beta supported on a small column subset at n = 50, N = 100
  int hold = 0, total = 0;
  for (int s = 0; s < 40; ++s) {
    const Ensemble e = sample_ensemble({.n = 50, .N = 100, .seed = static_cast<std::uint64_t>(900 + s)});
    rng::Stream st(s);
    Vector beta(100, 0.0);
    beta[st.below(100)] = 1.0;
    std::vector<int> t_set;
    for (int j = 0; j < 100; ++j)
      if (beta[j] != 0.0) t_set.push_back(j);
    const ApproxResidual r = approx_residual(e, beta, t_set);
    ++total;
    if (r.residual <= r.bound) ++hold;
  }
  EXPECT_GE(hold, static_cast<int>(0.95 * total));
}

TEST(TSigmaSet, ThresholdSelection) {
  CoefficientVector beta;
  beta.beta = {0.5, 0.1, 0.5};
  beta.l1 = 1.1;
  EXPECT_TRUE(t_sigma_set(beta, 10.0).empty());
  EXPECT_EQ(t_sigma_set(beta, 1e-12).size(), 3u);
  const std::vector<int> expect = {0, 2};
  EXPECT_EQ(t_sigma_set(beta, 0.3), expect);
  EXPECT_THROW(t_sigma_set(beta, 0.0), PreconditionError);
}

TEST(EventSparseSingular, PerConditionRecords) {
  const Ensemble e = sample_ensemble({.n = 30, .N = 60, .seed = 91});
  const EventReport rep = event_sparse_singular(e, 0.01, 100);
  const nlohmann::json recs = event_report_records(e.config.seed, rep);
  ASSERT_EQ(recs.size(), rep.conditions.size());
  for (size_t i = 0; i < recs.size(); ++i) {
    EXPECT_EQ(recs[i].at("seed").get<std::uint64_t>(), e.config.seed);
    EXPECT_EQ(recs[i].at("condition").get<std::string>(), rep.conditions[i].name);
  }
}
