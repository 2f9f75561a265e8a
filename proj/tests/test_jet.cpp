#include <cmath>

#include <gtest/gtest.h>

#include "henon_lab/henon.hpp"
#include "henon_lab/jet.hpp"
#include "henon_lab/manifold.hpp"
#include "henon_lab/numeric.hpp"

using namespace henon_lab;

using J4 = Jet<4>;

TEST(Jet, GeometricSeriesFromDivision) {
  const J4 t = J4::variable(0.0);
  const J4 g = J4(1.0) / (1.0 - t);
  for (int k = 0; k <= 4; ++k) EXPECT_DOUBLE_EQ(g.coeff(k), 1.0);
}

TEST(Jet, ProductRuleAgainstClosedForm) {
  const J4 t = J4::variable(0.5);
  const J4 p = t * t * t;  // t^3 at 0.5
  EXPECT_DOUBLE_EQ(p.derivative(0), 0.125);
  EXPECT_DOUBLE_EQ(p.derivative(1), 0.75);
  EXPECT_DOUBLE_EQ(p.derivative(2), 3.0);
  EXPECT_DOUBLE_EQ(p.derivative(3), 6.0);
  EXPECT_DOUBLE_EQ(p.derivative(4), 0.0);
}

TEST(Jet, ComposeShiftsTheOuterExpansion) {
  // Outer: f(u) = u^2 expanded at u0 = 1, i.e. 1 + 2 du + du^2; inner u = 1 + t.
  const J4 outer = J4::from_coefficients({1.0, 2.0, 1.0, 0.0, 0.0});
  const J4 inner = 1.0 + J4::variable(0.0);
  const J4 r = compose(outer, inner);
  EXPECT_DOUBLE_EQ(r.coeff(0), 1.0);
  EXPECT_DOUBLE_EQ(r.coeff(1), 2.0);
  EXPECT_DOUBLE_EQ(r.coeff(2), 1.0);
  EXPECT_DOUBLE_EQ(r.coeff(3), 0.0);
}

TEST(Jet, ReversionGivesCatalanNumbers) {
  // x = t + t^2 inverts to dt = dx - dx^2 + 2 dx^3 - 5 dx^4 + ...
  const J4 t = J4::variable(0.0);
  const J4 dt = revert(J4(t + t * t));
  EXPECT_NEAR(dt.coeff(0), 0.0, 1e-15);
  EXPECT_NEAR(dt.coeff(1), 1.0, 1e-15);
  EXPECT_NEAR(dt.coeff(2), -1.0, 1e-15);
  EXPECT_NEAR(dt.coeff(3), 2.0, 1e-15);
  EXPECT_NEAR(dt.coeff(4), -5.0, 1e-15);
}

TEST(Jet, ReversionOfFlatSeriesThrows) {
  const J4 t = J4::variable(0.0);
  EXPECT_THROW(revert(J4(t * t)), Error);
}

TEST(Jet, GraphOverRecoversExplicitGraph) {
  // (x, y) = (2 + 3s, (2 + 3s)^2) is the graph y = x^2 at x = 2.
  const J4 s = J4::variable(0.0);
  const J4 x = 2.0 + 3.0 * s;
  const J4 y = x * x;
  const J4 g = graph_over(x, y);
  EXPECT_NEAR(g.coeff(0), 4.0, 1e-14);
  EXPECT_NEAR(g.coeff(1), 4.0, 1e-14);
  EXPECT_NEAR(g.coeff(2), 1.0, 1e-14);
  EXPECT_NEAR(g.coeff(3), 0.0, 1e-14);
}

// Derivatives carried through phi^k by jets against central differences of
// the iterated curve.
TEST(JetTransport, MatchesFiniteDifferencesThroughIterates) {
  const Params p{-1.93, 0.03};
  auto curve = [](double t) { return Point2{0.3 + t, -0.2 + 0.5 * t + 0.1 * t * t}; };
  for (int k : {1, 3, 5}) {
    for (double t0 : {-0.1, 0.0, 0.07}) {
      const J4 t = J4::variable(t0);
      const Germ<4> g = iterate(p, Germ<4>{0.3 + t, -0.2 + 0.5 * t + 0.1 * t * t}, k);
      const double h1 = 1e-5, h2 = 1e-4;
      const Point2 pp = iterate(p, curve(t0 + h1), k), pm = iterate(p, curve(t0 - h1), k);
      const Point2 qp = iterate(p, curve(t0 + h2), k), qm = iterate(p, curve(t0 - h2), k), q0 = iterate(p, curve(t0), k);
      const double d1x = (pp.x - pm.x) / (2 * h1), d1y = (pp.y - pm.y) / (2 * h1);
      const double d2x = (qp.x - 2 * q0.x + qm.x) / (h2 * h2), d2y = (qp.y - 2 * q0.y + qm.y) / (h2 * h2);
      auto rel = [](double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); };
      EXPECT_LT(rel(g.x.derivative(1), d1x), 1e-6) << "k=" << k;
      EXPECT_LT(rel(g.y.derivative(1), d1y), 1e-6) << "k=" << k;
      EXPECT_LT(rel(g.x.derivative(2), d2x), 1e-6) << "k=" << k;
      EXPECT_LT(rel(g.y.derivative(2), d2y), 1e-6) << "k=" << k;
    }
  }
}

TEST(JetTransport, ExtendedPrecisionAgreesWithDouble) {
  using JR = Jet<4, Real>;
  const Params p{-1.93, 0.03};
  const BasicParams<Real> pr{Real(-1.93), Real(0.03)};
  const J4 t = J4::variable(0.05);
  const JR tr = JR::variable(Real(0.05));
  const Germ<4> g = iterate(p, Germ<4>{0.3 + t, -0.2 + 0.5 * t}, 4);
  const Germ<4, Real> gr = iterate(pr, Germ<4, Real>{Real(0.3) + tr, Real(-0.2) + Real(0.5) * tr}, 4);
  for (int k = 0; k <= 4; ++k) {
    EXPECT_NEAR(g.y.derivative(k), to_double(gr.y.derivative(k)), 1e-9 * (1 + std::abs(g.y.derivative(k))));
  }
}
