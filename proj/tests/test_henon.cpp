#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "henon_lab/henon.hpp"
#include "henon_lab/numeric.hpp"

using namespace henon_lab;

namespace {

// Eigenvalues of the Jacobian from a general-purpose eigensolver, sorted by modulus.
std::pair<double, double> eigen_oracle(const Params& p, Point2 q) {
  Eigen::Matrix2d j;
  j << 0, 1, -p.b, 2 * q.y;
  Eigen::EigenSolver<Eigen::Matrix2d> es(j);
  double e0 = es.eigenvalues()[0].real(), e1 = es.eigenvalues()[1].real();
  if (std::abs(e0) > std::abs(e1)) std::swap(e0, e1);
  return {e0, e1};
}

}  // namespace

TEST(FixedPoints, ClosedFormAtTheCorner) {
  const auto [plus, minus] = fixed_points(Params{-2.0, 0.0});
  EXPECT_EQ(plus.location.x, 2.0);
  EXPECT_EQ(plus.location.y, 2.0);
  EXPECT_EQ(minus.location.x, -1.0);
  EXPECT_EQ(minus.location.y, -1.0);
  EXPECT_DOUBLE_EQ(plus.sigma, 4.0);
  EXPECT_DOUBLE_EQ(minus.sigma, -2.0);
  EXPECT_EQ(plus.lambda, 0.0);
}

TEST(FixedPoints, AreFixedAndEigenDataMatchesSolver) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ua(-2.1, -1.5), ub(-0.05, 0.05);
  for (int i = 0; i < 200; ++i) {
    const Params p{ua(rng), ub(rng)};
    for (const FixedPointData& fp : {eigen_data(p, Branch::plus), eigen_data(p, Branch::minus)}) {
      const Point2 img = apply(p, fp.location);
      EXPECT_LT(distance(img, fp.location), 1e-13);
      const auto [lo, hi] = eigen_oracle(p, fp.location);
      EXPECT_NEAR(fp.lambda, lo, 1e-12);
      EXPECT_NEAR(fp.sigma, hi, 1e-12);
      EXPECT_NEAR(fp.lambda * fp.sigma, p.b, 1e-14);
      const Vector2 ju = jacobian(p, fp.location) * fp.eig_vec_u;
      EXPECT_LT(distance(ju, fp.sigma * fp.eig_vec_u), 1e-12);
    }
  }
}

TEST(FixedPoints, EigenvaluesApproachCornerLimits) {
  double prev[4] = {INFINITY, INFINITY, INFINITY, INFINITY};
  for (double b : {1e-2, 1e-3, 1e-4}) {
    const auto [plus, minus] = fixed_points(Params{-2.0, b});
    const double d[4] = {std::abs(plus.sigma - 4), std::abs(plus.lambda), std::abs(minus.sigma + 2), std::abs(minus.lambda)};
    for (int k = 0; k < 4; ++k) {
      EXPECT_LT(d[k], 10 * b);
      EXPECT_LT(d[k], prev[k]);
      prev[k] = d[k];
    }
  }
}

TEST(FixedPoints, SaddlesAreDissipativeNearTheCorner) {
  const auto [plus, minus] = fixed_points(Params{-1.95, 0.02});
  EXPECT_TRUE(plus.dissipative);
  EXPECT_TRUE(minus.dissipative);
}

TEST(FixedPoints, NoRealFixedPointsThrows) {
  try {
    fixed_points(Params{1.0, 0.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::no_real_fixed_points);
  }
}

TEST(Map, InverseUndoesForward) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const Params p{-1.9, 0.03};
  for (int i = 0; i < 1000; ++i) {
    const Point2 q{u(rng), u(rng)};
    EXPECT_LT(distance(apply_inverse(p, apply(p, q)), q), 1e-12);
  }
}

TEST(Map, InverseAtZeroBIsDegenerate) {
  try {
    apply_inverse(Params{-2.0, 0.0}, Point2{0.0, 0.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::degenerate_parameter);
  }
}

TEST(Map, JacobianMatchesCentralDifferences) {
  const Params p{-1.9, 0.03};
  const Point2 q{0.4, -1.1};
  const Matrix2 j = jacobian_power(p, q, 3);
  const double h = 1e-6;
  for (int c = 0; c < 2; ++c) {
    const Point2 e = c == 0 ? Point2{h, 0} : Point2{0, h};
    const Point2 fp = iterate(p, q + e, 3), fm = iterate(p, q - e, 3);
    EXPECT_NEAR(j(0, c), (fp.x - fm.x) / (2 * h), 1e-6 * (1 + std::abs(j(0, c))));
    EXPECT_NEAR(j(1, c), (fp.y - fm.y) / (2 * h), 1e-6 * (1 + std::abs(j(1, c))));
  }
  EXPECT_NEAR(j.det(), p.b * p.b * p.b, 1e-15);
}

TEST(Conjugacy, ClassicalFormMatchesAtRandomPoints) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-1.5, 1.5), ua(1.0, 2.1), ub(-0.4, 0.4);
  for (int i = 0; i < 1000; ++i) {
    const Params p{ua(rng), ub(rng) == 0.0 ? 0.1 : ub(rng)};
    EXPECT_LT(conjugacy_residual(p, Point2{u(rng), u(rng)}), 1e-12);
  }
}

TEST(Conjugacy, DegenerateParametersThrow) {
  EXPECT_THROW(conjugacy_residual(Params{1.4, 0.0}, Point2{0.1, 0.1}), Error);
}

TEST(Numeric, DecimalRoundTripInExtendedPrecision) {
  const Real v = Real(1) / 3;
  EXPECT_EQ(from_decimal<Real>(to_decimal(v)), v);
  EXPECT_EQ(from_decimal<double>(to_decimal(0.1)), 0.1);
  EXPECT_THROW(from_decimal<double>("1.5x"), Error);
}

TEST(Numeric, MonomialFitRecoversPlantedCoefficients) {
  std::vector<double> x, y;
  for (int i = 0; i <= 40; ++i) {
    const double t = -1 + i / 20.0;
    x.push_back(t);
    y.push_back(0.5 - 2 * t * t + 0.25 * t * t * t);
  }
  const MonomialFit<double> f = fit_monomials(x, y, {0, 2, 3});
  EXPECT_NEAR(f.coeffs[0], 0.5, 1e-13);
  EXPECT_NEAR(f.coeffs[1], -2.0, 1e-13);
  EXPECT_NEAR(f.coeffs[2], 0.25, 1e-13);
  EXPECT_LT(f.rms, 1e-13);
}
