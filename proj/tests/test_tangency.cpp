#include <cmath>

#include <gtest/gtest.h>

#include "henon_lab/continuation.hpp"
#include "henon_lab/tangency.hpp"

using namespace henon_lab;

namespace {

using J = Jet<kJetOrder>;

J zero_graph(const double&) { return J(0.0); }

// (t, (t - 1)^2 + a - 0.3 b) against y = 0: tangent at t = 1 when a = 0.3 b.
GapContext parabola_context(const Params& p) {
  GapContext ctx;
  ctx.unstable = [p](const double& t0) {
    const J t = J::variable(t0);
    return CurveGerm{t, (t - 1.0) * (t - 1.0) + (p.a - 0.3 * p.b)};
  };
  ctx.stable = zero_graph;
  ctx.x_lo = ctx.t_lo = -5.0;
  ctx.x_hi = ctx.t_hi = 5.0;
  ctx.params = p;
  return ctx;
}

// (t, 0.3 t^2 + (t - 0.5)^3 + a (t - 0.5) + b - 0.2) against y = 0.3 x^2:
// cubic contact at t = 0.5, (a, b) = (0, 0.2).
GapContext cusp_context(const Params& p) {
  GapContext ctx;
  ctx.unstable = [p](const double& t0) {
    const J t = J::variable(t0);
    const J u = t - 0.5;
    return CurveGerm{t, 0.3 * t * t + u * u * u + p.a * u + (p.b - 0.2)};
  };
  ctx.stable = [](const double& x) { return J::from_coefficients({0.3 * x * x, 0.6 * x, 0.3, 0.0, 0.0}); };
  ctx.x_lo = ctx.t_lo = -5.0;
  ctx.x_hi = ctx.t_hi = 5.0;
  ctx.params = p;
  return ctx;
}

// Same curve traced through t = r(s) = t0 + c1 s + c2 s^2.
GapContext reparametrized(const GapContext& ctx, double t0, double c1, double c2) {
  GapContext out = ctx;
  out.unstable = [ctx, t0, c1, c2](const double& s0) {
    const J s = J::variable(s0);
    const J r = t0 + c1 * s + c2 * s * s;
    const CurveGerm g = ctx.unstable(r.value());
    return CurveGerm{compose(g.x, r), compose(g.y, r)};
  };
  out.t_lo = -1.0;
  out.t_hi = 1.0;
  return out;
}

int sign(double v) { return (v > 0) - (v < 0); }

}  // namespace

TEST(ClassifyOrder, Cases) {
  EXPECT_EQ(classify_order<double>({0.0, 1.0, 0.0, 0.0}), 0);
  EXPECT_EQ(classify_order<double>({0.0, 0.0, 2.0, 0.0}), 1);
  EXPECT_EQ(classify_order<double>({1e-12, 1e-11, -6.0, 0.0}), 1);
  EXPECT_EQ(classify_order<double>({0.0, 0.0, 0.0, 6.0}), 2);
  EXPECT_EQ(classify_order<double>({0.0, 1e-6, 1e-6, 1e-6}), 3);
}

TEST(ClassifyOrder, Errors) {
  try {
    classify_order<double>({0.0, 0.0, 0.0, 0.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::unclassifiable);
  }
  try {
    classify_order<double>({1e-3, 0.0, 2.0, 0.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::invalid_input);
  }
}

TEST(ClassifyOrder, ScalesChangeTheVerdict) {
  // g''' dominates once lengths are measured in units of 1e7.
  const std::array<double, 4> d{0.0, 0.0, 1e-3, 1.0};
  EXPECT_EQ(classify_order(d), 1);
  EXPECT_EQ(classify_order(d, FeatureScales<double>{1e7, 1e21}), 2);
}

TEST(QuadraticTangency, SyntheticParabola) {
  const GapFamily<double> family = parabola_context;
  for (double b : {-0.1, 0.0, 0.2}) {
    const TangencyRecord rec = find_quadratic_tangency(family, b, 0.4, 0.5);
    EXPECT_NEAR(rec.t_star, 1.0, 1e-12);
    EXPECT_NEAR(rec.params.a, 0.3 * b, 1e-12);
    EXPECT_EQ(rec.order, 1);
    EXPECT_TRUE(rec.genericity.certified);
    EXPECT_NEAR(rec.genericity.velocity_diff.y, 1.0, 1e-8);
    EXPECT_NEAR(rec.g_derivs[2], 2.0, 1e-12);
    EXPECT_EQ(classify_order(family(rec.params), rec.t_star), 1);
  }
}

TEST(QuadraticTangency, ContactSignAndVelocity) {
  const GapFamily<double> family = parabola_context;
  const double b = 0.1;
  const TangencyRecord rec = find_quadratic_tangency(family, b, 0.4, 0.5);
  const GapPath<double> path = [&](const double& a) { return family(Params{a, b}); };
  const Vector2 v = unfolding_velocity(path, rec.params.a, rec.t_star);
  EXPECT_NEAR(v.y, 1.0, 1e-8);
  // Raising a lifts the minimum of the parabola off the axis.
  EXPECT_EQ(classify_contact(rec, path, rec.params.a), ContactKind::breaking);
  EXPECT_EQ(classify_contact(2.0, -1.0), ContactKind::making);
  EXPECT_THROW(classify_contact(2.0, 0.0), Error);
}

TEST(QuadraticTangency, FlatCurvatureIsAmbiguous) {
  const GapFamily<double> family = cusp_context;
  const GapPath<double> path = [&](const double& b) { return family(Params{0.0, b}); };
  try {
    solve_quadratic_tangency(path, 0.5, 0.2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::order_ambiguous);
  }
}

TEST(CubicTangency, SyntheticCuspFromSeveralSeeds) {
  const GapFamily<double> family = cusp_context;
  for (auto seed : {std::array<double, 3>{0.6, 0.05, 0.15}, std::array<double, 3>{0.3, -0.1, 0.3}}) {
    const TangencyRecord rec = find_cubic_tangency(family, seed[0], Params{seed[1], seed[2]});
    EXPECT_NEAR(rec.t_star, 0.5, 1e-9);
    EXPECT_NEAR(rec.params.a, 0.0, 1e-9);
    EXPECT_NEAR(rec.params.b, 0.2, 1e-9);
    EXPECT_EQ(rec.order, 2);
    EXPECT_TRUE(rec.genericity.certified);
    EXPECT_NEAR(std::abs(rec.genericity.det_normalized), 1.0, 1e-6);
    EXPECT_NEAR(rec.g_derivs[3], 6.0, 1e-9);
    EXPECT_GT(rec.relative_g3, 0.1);
  }
}

TEST(CubicTangency, ThirdDerivativeRatioSeesCancellation) {
  // Curve and stable graph share their cubic term up to 1e-9.
  GapContext ctx = cusp_context(Params{0.0, 0.2});
  ctx.unstable = [](const double& t0) {
    const J t = J::variable(t0);
    return CurveGerm{t, (1.0 + 1e-9) * t * t * t};
  };
  ctx.stable = [](const double& x) {
    const J u = x + J::variable(0.0);
    return J(u * u * u);
  };
  EXPECT_LT(third_derivative_ratio(ctx, 0.4), 1e-8);
  EXPECT_GT(third_derivative_ratio(cusp_context(Params{0.0, 0.2}), 0.5), 0.1);
}

TEST(Reparametrization, CubicOrderAndSignsAreInvariant) {
  const GapFamily<double> family = cusp_context;
  const TangencyRecord rec = find_cubic_tangency(family, 0.6, Params{0.05, 0.15});
  const GapContext ctx = family(rec.params);
  for (double c1 : {0.7, -0.7, 2.5}) {
    const GapContext rctx = reparametrized(ctx, rec.t_star, c1, 0.2);
    const GapJet<double> g = gap_jet(rctx, 0.0);
    const FeatureScales<double> sc = cubic_feature_scales(g, 1.0);
    EXPECT_EQ(classify_order(rctx, 0.0, sc), 2) << "c1=" << c1;
    EXPECT_EQ(sign(g.derivative(3)), sign(rec.g_derivs[3]) * sign(c1));
    EXPECT_NEAR(g.derivative(3), rec.g_derivs[3] * c1 * c1 * c1, 1e-9);
  }
}

class QPlusTangency : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { rec_ = new TangencyRecord(quadratic_q_plus(0.02, 0.0, -1.96)); }
  static void TearDownTestSuite() {
    delete rec_;
    rec_ = nullptr;
  }
  static TangencyRecord* rec_;
};

TangencyRecord* QPlusTangency::rec_ = nullptr;

TEST_F(QPlusTangency, IsQuadraticAndGeneric) {
  const TangencyRecord& rec = *rec_;
  EXPECT_EQ(rec.order, 1);
  EXPECT_TRUE(rec.genericity.certified);
  EXPECT_LT(rec.relative_residual[0], 1e-10);
  EXPECT_LT(rec.relative_residual[1], 1e-10);
  // The contact lies on the stable graph of p+ near x = -2.
  EXPECT_NEAR(rec.location.x, -2.0, 0.2);
}

TEST_F(QPlusTangency, OtherSeedLandsOnTheSameSolution) {
  const TangencyRecord other = quadratic_q_plus(0.02, 0.03, rec_->params.a + 0.005);
  EXPECT_NEAR(other.params.a, rec_->params.a, 1e-10);
  EXPECT_LT(distance(other.location, rec_->location), 1e-8);
}

TEST_F(QPlusTangency, OrderAndCurvatureSignSurviveReparametrization) {
  const TangencyRecord& rec = *rec_;
  const GapContext ctx = q_plus_context(make_scene(rec.params, without_leaves(SceneOptions{})));
  for (double c1 : {0.5, -0.5, -3.0}) {
    const GapContext rctx = reparametrized(ctx, rec.t_star, c1, 0.1);
    const GapJet<double> g = gap_jet(rctx, 0.0);
    EXPECT_EQ(classify_order(rctx, 0.0, FeatureScales<double>{1.0 / std::abs(c1), 1.0}), 1) << "c1=" << c1;
    EXPECT_EQ(sign(g.derivative(2)), sign(rec.g_derivs[2]));
    EXPECT_NEAR(g.derivative(2), rec.g_derivs[2] * c1 * c1, 1e-7 * std::abs(rec.g_derivs[2]) * c1 * c1);
  }
}

TEST_F(QPlusTangency, VelocityAgreesWithRecordedDerivative) {
  const TangencyRecord& rec = *rec_;
  const SceneOptions o = without_leaves(SceneOptions{});
  const GapPath<double> path = [&](const double& a) { return q_plus_context(make_scene(Params{a, rec.params.b}, o)); };
  const Vector2 v = unfolding_velocity(path, rec.params.a, rec.t_star);
  EXPECT_NEAR(v.y, rec.genericity.velocity_diff.y, 1e-5 * std::abs(v.y));
}
