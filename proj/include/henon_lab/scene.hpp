#pragma once

// The manifold pieces near (a, b) = (-2, 0) that the tangency hunts use:
//   l-   a y-graph piece of W^u(p-) crossing y = 0 at x > 0,
//   l+   a y-graph piece of W^u(p+) crossing y = 0 at x < 0,
//   S+   the x-graph of W^s(p+) near x = -2,
//   L_k  the k-th preimage leaf of the local x-graph of W^s(p-).
// The gaps of phi^2(l-) against S+ and of phi^2(l+) against L_k give the two
// heteroclinic tangencies q+ and q-.

#include <memory>
#include <tuple>
#include <vector>

#include "henon_lab/error.hpp"
#include "henon_lab/henon.hpp"
#include "henon_lab/manifold.hpp"
#include "henon_lab/tangency.hpp"

namespace henon_lab {

struct SceneOptions {
  Rect box{-3.0, 3.0, -3.0, 3.0};
  int degree = 18;
  double wu_minus_arclength = 8.0;
  double wu_plus_arclength = 10.0;
  double ws_plus_arclength = 6.0;
  double l_half_width = 0.25;  ///< l+ and l- are graphs over |y| <= l_half_width
  double splus_lo = -2.4;
  double splus_hi = -1.6;
  double leaf_lo = -2.5;
  double leaf_hi = 2.5;
  double leaf_seed = 1.9;  ///< height of the preimage branch followed by the leaves
  int leaf_anchors = 50;
  int max_leaf_depth = 3;
  int image_power = 2;  ///< l-hat = phi^image_power(l)
};

struct Scene {
  Params params;
  FixedPointData plus, minus;
  ManifoldBranch wu_minus, wu_plus, ws_plus;
  std::shared_ptr<const HoldingFunction> l_minus, l_plus, s_plus;
  std::vector<std::shared_ptr<const HoldingFunction>> leaves;  ///< leaves[k] = L_k, L_0 local
  SceneOptions options;

  const HoldingFunction& leaf(int k) const {
    if (k < 0 || k >= static_cast<int>(leaves.size())) fail(ErrorKind::invalid_input, "leaf depth outside the built range");
    return *leaves[static_cast<std::size_t>(k)];
  }
};

namespace detail {

/// Index of the nth crossing of y = 0 on the requested side of x = 0.
inline std::size_t y_zero_crossing(const ManifoldBranch& br, int nth, bool x_positive) {
  int count = 0;
  for (std::size_t i = 1; i < br.samples.size(); ++i) {
    const Point2 a = br.samples[i - 1].point, b = br.samples[i].point;
    if ((a.y < 0.0) != (b.y < 0.0) && ((b.x > 0.0) == x_positive) && ++count == nth) return i;
  }
  fail(ErrorKind::out_of_domain, "unstable branch never crosses y = 0 on the requested side");
}

inline HoldingFunction y_graph_near(const ManifoldBranch& br, std::size_t idx, double half_width) {
  while (idx > 0) {
    const double y = br.samples[idx - 1].point.y;
    if (y < -half_width || y > half_width) break;
    --idx;
  }
  return graph_from_samples(br.samples, br.local, GraphAxis::y, -half_width, half_width, kDefaultSlopeCap,
                            idx > 0 ? idx - 1 : 0);
}

}  // namespace detail

inline Scene make_scene(const Params& p, const SceneOptions& opt = {}) {
  if (p.b == 0.0) fail(ErrorKind::degenerate_parameter, "the scene needs b != 0 for stable growth");
  Scene s;
  s.params = p;
  s.options = opt;
  std::tie(s.plus, s.minus) = fixed_points(p);
  if (!s.plus.dissipative || !s.minus.dissipative)
    fail(ErrorKind::out_of_domain, "fixed points are not dissipative saddles at these parameters");

  s.wu_minus = grow_branch(local_parametrization(s.minus, ManifoldKind::unstable, opt.degree, 0, Side::plus_dir),
                           opt.wu_minus_arclength, opt.box);
  s.l_minus = std::make_shared<const HoldingFunction>(
      detail::y_graph_near(s.wu_minus, detail::y_zero_crossing(s.wu_minus, 1, true), opt.l_half_width));

  s.wu_plus = grow_branch(local_parametrization(s.plus, ManifoldKind::unstable, opt.degree, 0, Side::minus_dir),
                          opt.wu_plus_arclength, opt.box);
  s.l_plus = std::make_shared<const HoldingFunction>(
      detail::y_graph_near(s.wu_plus, detail::y_zero_crossing(s.wu_plus, 1, false), opt.l_half_width));

  s.ws_plus = grow_branch(local_parametrization(s.plus, ManifoldKind::stable, opt.degree, 0, Side::minus_dir),
                          opt.ws_plus_arclength, opt.box);
  s.s_plus = std::make_shared<const HoldingFunction>(holding_function(s.ws_plus, opt.splus_lo, opt.splus_hi));

  auto ws_minus = std::make_shared<const LocalManifold>(solve_local_manifold(s.minus, ManifoldKind::stable, opt.degree));
  s.leaves.push_back(
      std::make_shared<const HoldingFunction>(local_graph(ws_minus, opt.leaf_lo, opt.leaf_hi, opt.leaf_anchors)));
  for (int k = 1; k <= opt.max_leaf_depth; ++k)
    s.leaves.push_back(std::make_shared<const HoldingFunction>(
        preimage_leaf(s.leaves.back(), p, opt.leaf_lo, opt.leaf_hi, opt.leaf_seed, opt.leaf_anchors)));
  return s;
}

/// Germ of phi^power(l(t)) for a y-graph l, parametrized by the height t.
inline CurveGerm image_germ(const Params& p, const HoldingFunction& l, double t, int power) {
  const CurveGerm g{l.jet<kJetOrder>(t), Jet<kJetOrder>::variable(t)};
  return iterate(p, g, power);
}

/// Gap of phi^power(curve) against an x-graph, with the curve a y-graph of the scene.
inline GapContext image_gap_context(const Params& p, std::shared_ptr<const HoldingFunction> curve,
                                    std::shared_ptr<const HoldingFunction> stable, int power) {
  const double lo = curve->x_lo(), hi = curve->x_hi();
  auto unstable = [p, curve, power](double t) { return image_germ(p, *curve, t, power); };
  return make_gap_context(unstable, std::move(stable), p, lo, hi);
}

/// q+ gap: phi^2(l-) against S+.
inline GapContext q_plus_context(const Scene& s) {
  return image_gap_context(s.params, s.l_minus, s.s_plus, s.options.image_power);
}

/// q- gap: phi^2(l+) against the leaf L_k.
inline GapContext q_minus_context(const Scene& s, int leaf_depth) {
  s.leaf(leaf_depth);
  return image_gap_context(s.params, s.l_plus, s.leaves[static_cast<std::size_t>(leaf_depth)], s.options.image_power);
}

}  // namespace henon_lab
