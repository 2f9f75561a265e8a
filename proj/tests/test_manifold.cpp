#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "henon_lab/manifold.hpp"
#include "henon_lab/scene.hpp"

using namespace henon_lab;

namespace {

const Params kNear{-1.95, 0.02};

}  // namespace

TEST(LocalManifold, InvarianceResidualWithinValidityInterval) {
  const auto [plus, minus] = fixed_points(kNear);
  for (const FixedPointData& fp : {plus, minus}) {
    for (ManifoldKind kind : {ManifoldKind::stable, ManifoldKind::unstable}) {
      const LocalManifold m = solve_local_manifold(fp, kind);
      EXPECT_LT(m.validity_residual, kValidityTolerance);
      for (int i = 0; i <= 100; ++i) EXPECT_LT(m.invariance_residual(-1.0 + i / 50.0), kValidityTolerance);
      // Tangent to the eigenvector at the fixed point.
      const Vector2 v = kind == ManifoldKind::stable ? fp.eig_vec_s : fp.eig_vec_u;
      const Point2 c1 = m.coefficient(1);
      EXPECT_LT(std::abs(c1.x * v.y - c1.y * v.x), 1e-12 * norm(c1));
    }
  }
}

TEST(LocalManifold, ExtendedPrecisionMatchesDouble) {
  const auto [plus, minus] = fixed_points(kNear);
  const auto [plus_r, minus_r] = fixed_points(BasicParams<Real>{Real(kNear.a), Real(kNear.b)});
  const LocalManifold m = solve_local_manifold(minus, ManifoldKind::unstable, 18, 0, kValidityTolerance, 0.5);
  const BasicLocalManifold<Real> mr = solve_local_manifold(minus_r, ManifoldKind::unstable, 18, 0, Real(1e-20), Real(0.5));
  for (double t : {-1.0, -0.3, 0.4, 1.0}) {
    const Point2 q = m.point(t);
    const Vec2T<Real> qr = mr.point(Real(t));
    EXPECT_NEAR(q.x, to_double(qr.x), 1e-12);
    EXPECT_NEAR(q.y, to_double(qr.y), 1e-12);
  }
}

TEST(GrownManifold, UnstableOfPlusAtZeroBIsTheParabola) {
  const Params p{-2.0, 0.0};
  const auto [plus, minus] = fixed_points(p);
  const Rect box{-2.5, 3.5, -3.0, 8.0};
  double worst = 0.0, x_min = INFINITY, x_max = -INFINITY;
  for (Side side : {Side::plus_dir, Side::minus_dir}) {
    const ManifoldBranch br = grow_branch(local_parametrization(plus, ManifoldKind::unstable, 18, 0, side), 40.0, box);
    ASSERT_GT(br.samples.size(), 10u);
    for (const BranchSample& s : br.samples) {
      worst = std::max(worst, std::abs(s.point.y - (s.point.x * s.point.x - 2.0)));
      x_min = std::min(x_min, s.point.x);
      x_max = std::max(x_max, s.point.x);
    }
    for (std::size_t i = 1; i < br.samples.size(); ++i) EXPECT_GE(br.samples[i].arclength, br.samples[i - 1].arclength);
  }
  EXPECT_LT(worst, 1e-10);
  EXPECT_LE(x_min, -2.0 + 1e-3);
  EXPECT_GE(x_max, 3.0);
}

TEST(GrownManifold, ImagesOfUnstableSamplesStayOnTheBranch) {
  const auto [plus, minus] = fixed_points(kNear);
  const Rect box{-3.0, 3.0, -3.0, 3.0};
  const ManifoldBranch br = grow_branch(local_parametrization(minus, ManifoldKind::unstable), 6.0, box);
  ASSERT_GT(br.samples.size(), 20u);
  // Invariant under the iterate the branch was built for (phi^2 when the
  // multiplier is negative); only images inside the grown part count.
  const double reach = br.samples.back().arclength / 6.0;
  int checked = 0;
  for (std::size_t i = 0; i < br.samples.size() && br.samples[i].arclength < reach; i += 3) {
    const Point2 img = iterate(kNear, br.samples[i].point, br.iterate());
    if (!box.contains(img) || distance(img, minus.location) > 1.0) continue;
    EXPECT_LT(distance_to_branch(br, img), 1e-9);
    ++checked;
  }
  EXPECT_GT(checked, 3);
}

TEST(GrownManifold, StableGrowthAtZeroBThrows) {
  const Params p{-2.0, 0.0};
  const auto [plus, minus] = fixed_points(p);
  try {
    grow_branch(local_parametrization(plus, ManifoldKind::stable), 4.0, Rect{-3, 3, -3, 3});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::degenerate_parameter);
  }
}

TEST(GrownManifold, StableSamplesMapForwardOntoTheBranch) {
  const auto [plus, minus] = fixed_points(kNear);
  const Rect box{-3.0, 3.0, -3.0, 3.0};
  const ManifoldBranch br = grow_branch(local_parametrization(plus, ManifoldKind::stable, 18, 0, Side::minus_dir), 6.0, box);
  int checked = 0;
  for (std::size_t i = 0; i < br.samples.size(); i += 5) {
    const Point2 img = iterate(kNear, br.samples[i].point, br.iterate());
    if (!box.contains(img)) continue;
    EXPECT_LT(distance_to_branch(br, img), 1e-8);
    ++checked;
  }
  EXPECT_GT(checked, 3);
}

TEST(HoldingFunction, PreimageLeavesMapOntoTheirParents) {
  const Scene s = make_scene(kNear);
  ASSERT_GE(s.leaves.size(), 3u);
  for (std::size_t k = 1; k < s.leaves.size(); ++k) {
    const HoldingFunction& leaf = *s.leaves[k];
    const HoldingFunction& parent = *s.leaves[k - 1];
    EXPECT_EQ(leaf.leaf_depth(), static_cast<int>(k));
    for (int i = 0; i <= 40; ++i) {
      const double x = leaf.x_lo() + (leaf.x_hi() - leaf.x_lo()) * i / 40.0;
      const Point2 img = apply(kNear, leaf.point(x));
      ASSERT_TRUE(parent.contains(img.x));
      EXPECT_LT(std::abs(img.y - parent(img.x)), 1e-10) << "leaf " << k << " x=" << x;
    }
  }
}

TEST(HoldingFunction, JetDerivativesMatchFiniteDifferences) {
  const Scene s = make_scene(kNear);
  const HoldingFunction& g = *s.s_plus;
  for (double x : {-2.2, -2.0, -1.8}) {
    const Jet<4> j = g.jet<4>(x);
    const double h = 1e-5;
    EXPECT_NEAR(j.derivative(1), (g(x + h) - g(x - h)) / (2 * h), 1e-6 * (1 + std::abs(j.derivative(1))));
    EXPECT_NEAR(j.derivative(2), (g(x + 10 * h) - 2 * g(x) + g(x - 10 * h)) / (100 * h * h), 1e-5 * (1 + std::abs(j.derivative(2))));
  }
}

TEST(HoldingFunction, LocalGraphRejectsUncoveredInterval) {
  const auto [plus, minus] = fixed_points(kNear);
  auto m = std::make_shared<const LocalManifold>(solve_local_manifold(minus, ManifoldKind::stable));
  EXPECT_THROW(local_graph(m, -100.0, 100.0), Error);
}
