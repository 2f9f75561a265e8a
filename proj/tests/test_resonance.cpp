#include <cmath>
#include <random>
#include <set>
#include <tuple>

#include <gtest/gtest.h>

#include "henon_lab/resonance.hpp"

using namespace henon_lab;

namespace {

// Every (p, q, target) with |lambda^p sigma^q - target| < tol, by direct
// enumeration with integer powers.
std::set<std::tuple<int, int, int>> brute_hits(double lambda, double sigma, int max_order, double tol) {
  std::set<std::tuple<int, int, int>> out;
  for (int p = 0; p <= max_order; ++p) {
    for (int q = 0; p + q <= max_order; ++q) {
      if (p + q < 2) continue;
      double v = 1.0;
      for (int i = 0; i < p; ++i) v *= lambda;
      for (int i = 0; i < q; ++i) v *= sigma;
      if (std::abs(v - lambda) < tol) out.insert({p, q, 0});
      if (std::abs(v - sigma) < tol) out.insert({p, q, 1});
    }
  }
  return out;
}

std::set<std::tuple<int, int, int>> as_set(const ResonanceReport& r) {
  std::set<std::tuple<int, int, int>> out;
  for (const ResonanceHit& h : r.hits) out.insert({h.p, h.q, h.target == ResonanceTarget::lambda ? 0 : 1});
  return out;
}

}  // namespace

TEST(Resonance, HalfAndTwoResonatesAtOrderThree) {
  // lambda sigma = 1, so lambda^2 sigma = lambda and lambda sigma^2 = sigma.
  const ResonanceReport r = resonance_scan(0.5, 2.0, 6);
  EXPECT_EQ(r.clean_up_to, 2);
  ASSERT_FALSE(r.hits.empty());
  EXPECT_EQ(r.hits.front().p + r.hits.front().q, 3);
  EXPECT_EQ(as_set(r), brute_hits(0.5, 2.0, 6, 1e-6));
  EXPECT_EQ(r.label, "diagnostic");
}

TEST(Resonance, OrderOneHasNothingToScan) {
  const ResonanceReport r = resonance_scan(0.5, 2.0, 1);
  EXPECT_TRUE(r.hits.empty());
  EXPECT_EQ(r.clean_up_to, 1);
}

TEST(Resonance, HitsSortedByDistance) {
  const ResonanceReport r = resonance_scan(0.5, 2.0, 8, 1e-3);
  for (std::size_t i = 1; i < r.hits.size(); ++i) EXPECT_LE(r.hits[i - 1].distance, r.hits[i].distance);
}

TEST(Resonance, MatchesEnumerationOnRandomEigenvalues) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ul(-0.9, 0.9), us(1.1, 4.5);
  for (int i = 0; i < 200; ++i) {
    const double l = ul(rng), s = us(rng) * (i % 2 ? -1 : 1);
    const ResonanceReport r = resonance_scan(l, s, 8, 1e-2);
    EXPECT_EQ(as_set(r), brute_hits(l, s, 8, 1e-2));
  }
}

TEST(Resonance, LargerToleranceNeverLosesHits) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> ul(-0.5, 0.5), us(1.5, 4.0);
  for (int i = 0; i < 100; ++i) {
    const double l = ul(rng), s = -us(rng);
    std::size_t prev = 0;
    int prev_clean = 1 << 30;
    for (double tol : {1e-8, 1e-6, 1e-4, 1e-2, 1e-1}) {
      const ResonanceReport r = resonance_scan(l, s, 10, tol);
      EXPECT_GE(r.hits.size(), prev);
      EXPECT_LE(r.clean_up_to, prev_clean);
      prev = r.hits.size();
      prev_clean = r.clean_up_to;
    }
  }
}

TEST(Resonance, SaddleNearTheCornerIsCleanToHighOrder) {
  const auto [plus, minus] = fixed_points(Params{-1.99, 0.005});
  EXPECT_GE(resonance_scan(minus, 8).clean_up_to, 8);
  EXPECT_GE(resonance_scan(plus, 8).clean_up_to, 4);
}
