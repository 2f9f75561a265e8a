// Tangency curve, heteroclinic cycle, cubic tangency and rescaling, computed
// once and shared by every test in the suite.

#include <cmath>
#include <memory>

#include <gtest/gtest.h>

#include "henon_lab/continuation.hpp"
#include "henon_lab/rescale.hpp"

using namespace henon_lab;

namespace {

struct Results {
  ContinuationCurve curve;
  CycleConfig cycle;
  CubicHuntResult cubic;
  RescaleSetup setup;
  RescaleReport rescale;
};

}  // namespace

class Pipeline : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    auto r = std::make_unique<Results>();
    r->curve = continue_quadratic_curve(0.05, 0.005, 0.005);
    r->cycle = find_secondary_tangency(r->curve);
    r->cubic = locate_cubic_from_cycle(r->cycle);
    r->setup = make_rescale_setup(r->cycle);
    r->rescale = rescale_verify(r->setup, Real(0), Real(0.005), 4, 3);
    results_ = r.release();
  }
  static void TearDownTestSuite() {
    delete results_;
    results_ = nullptr;
  }
  static const Results& r() { return *results_; }
  static Results* results_;
};

Results* Pipeline::results_ = nullptr;

TEST_F(Pipeline, CurveResidualsAndSmallBLimits) {
  const auto& s = r().curve.samples;
  ASSERT_GE(s.size(), 2u);
  for (const ContinuationSample& c : s) EXPECT_LT(c.residual, 1e-9) << "b=" << c.b;
  EXPECT_DOUBLE_EQ(s.front().b, 0.05);
  EXPECT_DOUBLE_EQ(s.back().b, 0.005);
  EXPECT_LT(std::abs(s.back().a + 2.0), 0.05);
  EXPECT_NEAR(s.back().velocity_a, -8.0 / 3.0, 0.3 * 8.0 / 3.0);
}

TEST_F(Pipeline, CurveIsMonotoneInB) {
  const auto& s = r().curve.samples;
  for (std::size_t i = 1; i < s.size(); ++i) {
    EXPECT_LT(s[i].b, s[i - 1].b);
    EXPECT_LT(s[i].a, s[i - 1].a);
  }
}

TEST_F(Pipeline, CycleHasTwoGenericQuadraticTangencies) {
  const CycleConfig& c = r().cycle;
  EXPECT_GT(c.b0, 0.0);
  EXPECT_LT(c.b0, 0.05);
  EXPECT_GE(c.leaf_depth, 0);
  for (const TangencyRecord* t : {&c.q_plus, &c.q_minus}) {
    EXPECT_EQ(t->order, 1);
    EXPECT_TRUE(t->genericity.certified);
    EXPECT_LT(t->relative_residual[0], 1e-9);
    EXPECT_LT(t->relative_residual[1], 1e-9);
  }
  EXPECT_EQ(c.q_plus.kind, TangencyKind::heteroclinic);
  EXPECT_EQ(c.q_minus.kind, TangencyKind::heteroclinic);
  EXPECT_TRUE(c.q_plus_orbit.ok);
  EXPECT_TRUE(c.q_minus_orbit.ok);
}

TEST_F(Pipeline, CycleVelocityNearSixRootTwo) {
  const double target = -6.0 * std::sqrt(2.0);
  EXPECT_NEAR(r().cycle.q_minus.genericity.velocity_diff.y, target, 0.3 * std::abs(target));
}

TEST_F(Pipeline, CycleSitsOnTheCurve) {
  // The cycle's q+ is the curve's tangency at b0.
  const CycleConfig& c = r().cycle;
  EXPECT_DOUBLE_EQ(c.q_plus.params.b, c.b0);
  EXPECT_DOUBLE_EQ(c.q_plus.params.a, c.a0);
  const TangencyRecord again = quadratic_q_plus(c.b0, c.q_plus.t_star, c.a0 + 1e-4);
  EXPECT_NEAR(again.params.a, c.a0, 1e-10);
}

TEST_F(Pipeline, CubicTangencyCertificate) {
  const CubicHuntResult& h = r().cubic;
  const auto& rec = h.record;
  EXPECT_EQ(rec.order, 2);
  EXPECT_GT(rec.params.b, 0);
  EXPECT_LT(abs(rec.params.a - Real(r().cycle.a0)), Real(0.05));
  EXPECT_LT(abs(rec.params.b - Real(r().cycle.b0)), Real(0.05));
  for (const Real& v : rec.relative_residual) EXPECT_LT(v, Real(1e-9));
  EXPECT_GT(rec.relative_g3, Real(1e-3));
  EXPECT_TRUE(rec.genericity.certified);
  EXPECT_GT(abs(rec.genericity.det_a1a4_a2a3), 10 * rec.genericity.fd_error);
  EXPECT_TRUE(h.verification.passed);
}

TEST_F(Pipeline, CubicTangencyRemeasuredFromScratch) {
  // Fresh manifolds with a third choice of degree and scales.
  const CubicHuntResult& h = r().cubic;
  const PreciseFamilyOptions alt{72, 120, 300, -2.4, -1.6};
  HomoclinicAddress addr = h.address;
  const CubicHuntOptions defaults;
  addr.sigma_seed = h.address.sigma_seed * Real(defaults.precise.stable_scale) / Real(alt.stable_scale);
  const GapFamily<Real> fam = homoclinic_family(addr, alt);
  const BasicGapContext<Real> ctx = fam(h.record.params);
  Real s = h.record.t_star * Real(defaults.precise.unstable_scale) / Real(alt.unstable_scale);
  for (int it = 0; it < 100; ++it) {
    const Germ<kJetOrder, Real> c = ctx.unstable(s);
    const Real step = (c.x.value() - h.record.location.x) / c.x.coeff(1);
    s -= step;
    if (abs(step) < Real(1e-45)) break;
  }
  const CubicMeasurement<Real> m = measure_cubic(fam, s, h.record.params);
  for (const Real& v : m.relative_residual) EXPECT_LT(v, Real(1e-9));
  EXPECT_GT(m.relative_g3, Real(1e-3));
  EXPECT_TRUE(m.genericity.certified);
  EXPECT_NEAR(to_double(m.genericity.det_normalized), to_double(h.record.genericity.det_normalized),
              1e-6 * std::abs(to_double(h.record.genericity.det_normalized)));
}

TEST_F(Pipeline, RescaledCurvesDecayAtPredictedRates) {
  const RescaleReport& rep = r().rescale;
  ASSERT_EQ(rep.fits.size(), 3u);
  const double cubic_target = 1 / std::sqrt(rep.sigma), quartic_target = 1 / rep.sigma;
  for (double c : rep.cubic_ratios) EXPECT_NEAR(c, cubic_target, 0.3 * cubic_target);
  for (double q : rep.quartic_ratios) EXPECT_NEAR(q, quartic_target, 0.4 * quartic_target);
  for (double s : rep.suppression) EXPECT_GE(s, 10.0);
  EXPECT_FALSE(rep.insufficient_decay);
}

TEST_F(Pipeline, RescaledCurveParabolaCoefficientIsStable) {
  const RescaleReport& rep = r().rescale;
  for (double d : rep.b1_changes) EXPECT_LT(d, 0.05);
  // The unit of u puts b1 near its target.
  EXPECT_NEAR(to_double(rep.fits.front().b1), 0.25, 0.1);
}

TEST_F(Pipeline, RescaledCurveRejectsTooFewSamples) {
  RescaleSetup st = r().setup;
  st.options.samples = 10;
  EXPECT_THROW(rescaled_curve(st, Real(0), Real(0.005), 4), Error);
}
