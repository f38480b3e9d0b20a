#include <gtest/gtest.h>

#include "gplab/grassmann.hpp"

using namespace gplab;

namespace {

Subspace sub(std::vector<Vector> cols) { return orthonormal_basis(cols); }

}  // namespace

TEST(GrassmannDistance, MatchesProjectorOracle) {
  rng::Stream st(2);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 4 + trial % 4;
    const int d = 1 + trial % (n / 2);
    Subspace e = random_subspace(st, n, d);
    Subspace f = random_subspace(st, n, d);
    EXPECT_NEAR(grassmann_distance(e, f), projector_distance(e, f), 1e-10);
  }
}

TEST(BuildNet, CoversLinesInThePlane) {
  const GrassmannNet net = build_net(2, 1, 0.25, 2000, {.seed = 5});
  EXPECT_LE(net.coverage_audit, 0.25);
  // packing: entries pairwise farther than epsilon/2 (greedy gives > epsilon)
  for (size_t i = 0; i < net.entries.size(); ++i)
    for (size_t j = i + 1; j < net.entries.size(); ++j)
      EXPECT_GT(grassmann_distance(net.entries[i], net.entries[j]), 0.25 / 2);
}

TEST(BuildNet, RangeChecksAndCoverageFailure) {
  EXPECT_THROW(build_net(4, 2, 0.3, 100), PreconditionError);
  EXPECT_THROW(build_net(4, 3, 0.25, 100), PreconditionError);
  // an impossible entry cap must surface as a coverage failure with a radius
  try {
    build_net(6, 2, 0.25, 4000, {.seed = 1, .entry_cap = 4});
    FAIL() << "expected CoverageError";
  } catch (const CoverageError& e) {
    EXPECT_GT(e.achieved_radius, 0.25);
  }
}

TEST(Nearest, ExactHitAndSymmetry) {
  const GrassmannNet net = build_net(3, 1, 0.25, 4000, {.seed = 9});
  const auto [idx, dist] = nearest(net, net.entries[2]);
  EXPECT_EQ(idx, 2);
  EXPECT_NEAR(dist, 0.0, 1e-12);

  GrassmannNet two;
  two.n = 3;
  two.d = 1;
  two.epsilon = 0.25;
  two.entries = {net.entries[0], net.entries[1]};
  const double d01 = nearest(two, net.entries[0]).second;
  std::swap(two.entries[0], two.entries[1]);
  const double d10 = nearest(two, net.entries[1]).second;
  EXPECT_NEAR(d01, d10, 1e-15);

  rng::Stream st3(3);
  const Subspace wrong = random_subspace(st3, 4, 1);
  EXPECT_THROW(nearest(net, wrong), PreconditionError);
}

TEST(Decompose, MemberOfNetTerminatesImmediately) {
  const GrassmannNet net = build_net(4, 1, 0.25, 6000, {.seed = 11});
  const auto steps = decompose_projection(net, net.entries[3], 4);
  ASSERT_EQ(steps.size(), 4u);
  EXPECT_EQ(steps[0].index, 3);
  // B_1 = 0, so every later operator vanishes and one term is exact
  Matrix acc = matmul(steps[0].d_op, projector(net.entries[3]));
  EXPECT_LT(spectral_norm(projector(net.entries[3]) - acc), 1e-10);
  for (size_t j = 1; j < steps.size(); ++j)
    EXPECT_LT(spectral_norm(steps[j].d_op), 1e-10);
}

TEST(Decompose, GeometricBoundsHoldOnRandomSubspaces) {
  const double eps = 0.25;
  const GrassmannNet net = build_net(4, 2, eps, 30000, {.seed = 21});
  rng::Stream st(33);
  for (int trial = 0; trial < 10; ++trial) {
    const Subspace f = random_subspace(st, 4, 2);
    const auto steps = decompose_projection(net, f, 8);
    Matrix acc(4, 4);
    for (int m = 1; m <= 8; ++m) {
      const auto& s = steps[m - 1];
      EXPECT_LE(spectral_norm(s.d_op), 2.0 * std::pow(eps, m - 1) + 1e-9);
      EXPECT_NEAR(s.norm_bound, 2.0 * std::pow(eps, m - 1), 1e-15);
      acc = acc + matmul(s.d_op, projector(net.entries[s.index]));
      EXPECT_LE(spectral_norm(projector(f) - acc),
                2.0 * std::pow(eps, m) / (1.0 - eps) + 1e-8);
    }
  }
}

TEST(Decompose, FiveTermResidualBoundValue) {
  // the geometric tail: 2 (1/4)^5 / (3/4) = 0.002604166...
  EXPECT_NEAR(2.0 * std::pow(0.25, 5) / 0.75, 0.0026041666666, 1e-10);
}

TEST(Decompose, PaddingIsDeterministic) {
  const GrassmannNet net = build_net(4, 2, 0.25, 30000, {.seed = 41});
  rng::Stream st(52);
  const Subspace f = random_subspace(st, 4, 2);
  const auto s1 = decompose_projection(net, f, 6);
  const auto s2 = decompose_projection(net, f, 6);
  ASSERT_EQ(s1.size(), s2.size());
  for (size_t j = 0; j < s1.size(); ++j) {
    EXPECT_EQ(s1[j].index, s2[j].index);
    for (size_t t = 0; t < s1[j].d_op.a.size(); ++t)
      EXPECT_EQ(s1[j].d_op.a[t], s2[j].d_op.a[t]);
  }
}

TEST(ProjectionTails, TrivialAndFullSpaceCases) {
  const Ensemble e = sample_ensemble({.n = 10, .N = 20, .seed = 61});
  rng::Stream st(3);
  const Subspace f = random_subspace(st, 10, 2);
  // s so large that 8 s sqrt(d) dwarfs every generator norm
  const TailCount none = projection_tail_counts(e, f, 1000.0);
  EXPECT_EQ(none.count, 0);

  // full space: ||Proj X_j|| = ||X_j||; count by direct comparison
  std::vector<Vector> basis;
  for (int i = 0; i < 10; ++i) {
    Vector v(10, 0.0);
    v[i] = 1.0;
    basis.push_back(v);
  }
  const Subspace full = sub(basis);
  const double s = 10.0;
  const TailCount tc = projection_tail_counts(e, full, s);
  long direct = 0;
  for (int j = 0; j < e.N(); ++j)
    if (norm2(e.A.col(j)) > 8.0 * s * std::sqrt(10.0)) ++direct;
  EXPECT_EQ(tc.count, direct);
  EXPECT_NEAR(tc.bound, 2.0 * 100.0 * 20 * std::log2(s) / (s * s), 1e-12);
  EXPECT_THROW(projection_tail_counts(e, full, 5.0), PreconditionError);
}

TEST(NetSerialization, JsonRoundTrip) {
  const GrassmannNet net = build_net(3, 1, 0.25, 3000, {.seed = 77});
  const GrassmannNet back = net_from_json(to_json(net));
  EXPECT_EQ(back.n, net.n);
  EXPECT_EQ(back.d, net.d);
  EXPECT_EQ(back.epsilon, net.epsilon);
  ASSERT_EQ(back.entries.size(), net.entries.size());
  for (size_t i = 0; i < net.entries.size(); ++i)
    for (size_t t = 0; t < net.entries[i].basis.a.size(); ++t)
      EXPECT_EQ(back.entries[i].basis.a[t], net.entries[i].basis.a[t]);

  nlohmann::json bad = to_json(net);
  bad["entries"][0][0] = 17.0;  // no longer orthonormal
  EXPECT_THROW(net_from_json(bad), ConfigError);
}
