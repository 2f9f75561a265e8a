#pragma once

// Monomial non-resonance scan of saddle eigenvalues: every lambda^p sigma^q
// with 2 <= p + q <= max_order is compared with lambda and with sigma. The
// scan is a diagnostic stand-in for smooth-linearization hypotheses; a clean
// report says no low-order resonance obstructs them, nothing more.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "henon_lab/henon.hpp"

namespace henon_lab {

enum class ResonanceTarget { lambda, sigma };

inline std::string to_string(ResonanceTarget t) { return t == ResonanceTarget::lambda ? "lambda" : "sigma"; }

struct ResonanceHit {
  int p = 0;
  int q = 0;
  ResonanceTarget target = ResonanceTarget::lambda;
  double value = 0;     ///< lambda^p sigma^q
  double distance = 0;  ///< |value - target|
};

struct ResonanceReport {
  double lambda = 0, sigma = 0;
  int max_order = 0;
  double tol = 0;
  std::vector<ResonanceHit> hits;  ///< ascending distance
  int clean_up_to = 0;             ///< largest order with no hit below tol
  std::string label = "diagnostic";
};

inline ResonanceReport resonance_scan(double lambda, double sigma, int max_order, double tol = 1e-6) {
  ResonanceReport r;
  r.lambda = lambda;
  r.sigma = sigma;
  r.max_order = std::max(max_order, 1);
  r.tol = tol;
  int first_hit = r.max_order + 1;
  for (int order = 2; order <= r.max_order; ++order) {
    for (int p = 0; p <= order; ++p) {
      const int q = order - p;
      const double v = std::pow(lambda, p) * std::pow(sigma, q);
      for (ResonanceTarget t : {ResonanceTarget::lambda, ResonanceTarget::sigma}) {
        const double d = std::abs(v - (t == ResonanceTarget::lambda ? lambda : sigma));
        if (d < tol) {
          r.hits.push_back({p, q, t, v, d});
          first_hit = std::min(first_hit, order);
        }
      }
    }
  }
  std::stable_sort(r.hits.begin(), r.hits.end(),
                   [](const ResonanceHit& a, const ResonanceHit& b) { return a.distance < b.distance; });
  r.clean_up_to = first_hit - 1;
  return r;
}

inline ResonanceReport resonance_scan(const FixedPointData& fp, int max_order, double tol = 1e-6) {
  return resonance_scan(fp.lambda, fp.sigma, max_order, tol);
}

}  // namespace henon_lab
