#pragma once

// Gap functions between an unstable curve and a stable graph, tangency
// location (quadratic and cubic), order classification and unfolding
// certificates.
//
// The gap is g(t) = y(t) - eta(x(t)). Its t-derivatives come from composing
// the curve jet with the graph jet, never from differencing. Parameter
// derivatives are centered differences with one Richardson refinement, and
// every probe rebuilds the context at the perturbed parameters.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "henon_lab/error.hpp"
#include "henon_lab/henon.hpp"
#include "henon_lab/jet.hpp"
#include "henon_lab/manifold.hpp"
#include "henon_lab/numeric.hpp"

namespace henon_lab {

struct Tolerances {
  double zero = 1e-9;
  double nonzero = 1e-4;
  double generic = 1e-6;
};

template <class R>
using GapJet = Jet<kJetOrder, R>;

/// An unstable curve t -> (x(t), y(t)) against a stable graph y = eta(x).
template <class R>
struct BasicGapContext {
  std::function<Germ<kJetOrder, R>(const R&)> unstable;
  std::function<GapJet<R>(const R&)> stable;  ///< jet of eta at x, in powers of dx
  R x_lo = 0, x_hi = 0;                        ///< domain of the stable graph
  R t_lo = 0, t_hi = 0;                        ///< working interval of the curve
  BasicParams<R> params;
};

using GapContext = BasicGapContext<double>;

/// Gap contexts rebuilt from scratch at each parameter point.
template <class R>
using GapFamily = std::function<BasicGapContext<R>(const BasicParams<R>&)>;

/// One-parameter slice of a family.
template <class R>
using GapPath = std::function<BasicGapContext<R>(const R&)>;

inline GapContext make_gap_context(std::function<CurveGerm(double)> curve, std::shared_ptr<const HoldingFunction> eta,
                                   const Params& params, double t_lo, double t_hi) {
  if (!eta) fail(ErrorKind::invalid_input, "gap context needs a stable graph");
  if (eta->axis() != GraphAxis::x) fail(ErrorKind::invalid_input, "stable graph must be a graph over x");
  GapContext ctx;
  ctx.unstable = std::move(curve);
  ctx.stable = [eta](const double& x) { return eta->jet<kJetOrder>(x); };
  ctx.x_lo = eta->x_lo();
  ctx.x_hi = eta->x_hi();
  ctx.t_lo = t_lo;
  ctx.t_hi = t_hi;
  ctx.params = params;
  return ctx;
}

template <class R>
GapJet<R> gap_jet(const BasicGapContext<R>& ctx, const R& t) {
  using std::abs;
  const R t_margin = (ctx.t_hi - ctx.t_lo) * R(1e-9);
  if (t < ctx.t_lo - t_margin || t > ctx.t_hi + t_margin)
    fail(ErrorKind::out_of_domain, "gap evaluated outside the working interval");
  const Germ<kJetOrder, R> c = ctx.unstable(t);
  const R x0 = c.x.value();
  const R x_margin = (ctx.x_hi - ctx.x_lo) * R(1e-9);
  if (!(x0 >= ctx.x_lo - x_margin && x0 <= ctx.x_hi + x_margin))
    fail(ErrorKind::out_of_domain, "unstable curve leaves the stable graph's domain");
  return c.y - compose(ctx.stable(x0), c.x);
}

/// (g, g', g'', g''') at t.
template <class R>
std::array<R, 4> gap_derivatives(const BasicGapContext<R>& ctx, const R& t) {
  const GapJet<R> g = gap_jet(ctx, t);
  return {g.derivative(0), g.derivative(1), g.derivative(2), g.derivative(3)};
}

enum class TangencyKind { homoclinic, heteroclinic };

inline std::string to_string(TangencyKind k) { return k == TangencyKind::homoclinic ? "homoclinic" : "heteroclinic"; }

/// Which saddle owns the unstable curve and which owns the stable graph.
struct SaddlePair {
  Branch unstable_of = Branch::plus;
  Branch stable_of = Branch::plus;
};

template <class R>
struct BasicUnfoldingData {
  Vec2T<R> velocity_diff;   ///< quadratic case: (0, dg/ds)
  R det_a1a4_a2a3 = 0;      ///< cubic case: g_a g'_b - g_b g'_a
  R det_normalized = 0;     ///< det over the product of the two gradient norms
  R fd_step = 0;
  R fd_error = 0;           ///< Richardson error estimate of the certified quantity
  R condition_estimate = 0;
  bool certified = false;
};

/// Length and height units of a tangency: derivatives are compared as
/// |g^(k)| T^k / G so that certificates do not depend on how t is scaled.
template <class R>
struct FeatureScales {
  R t = 1;
  R g = 1;
};

template <class R>
struct NewtonStep {
  int iteration = 0;
  R t = 0;
  BasicParams<R> params;
  R residual = 0;
};

template <class R>
struct BasicTangencyRecord {
  R t_star = 0;
  Vec2T<R> location;
  BasicParams<R> params;
  R path_param = 0;  ///< converged path parameter of a one-parameter solve
  int order = 0;
  std::array<R, 4> g_derivs{};
  TangencyKind kind = TangencyKind::homoclinic;
  SaddlePair saddle_pair;
  BasicUnfoldingData<R> genericity;
  FeatureScales<R> scales;
  std::array<R, 3> relative_residual{};  ///< |g| / G, |g'| T / G, |g''| T^2 / G
  R relative_g3 = 0;                     ///< |g'''| against its chain-rule terms
  // Provenance.
  std::array<R, 3> seed{};  ///< (t, a, b)
  int iterations = 0;
  std::vector<NewtonStep<R>> history;
  int leaf_depth = -1;     ///< preimage depth of the stable leaf, when one was used
  int iterate_depth = -1;  ///< map steps applied to the unstable curve, when relevant
};

using TangencyRecord = BasicTangencyRecord<double>;
using UnfoldingData = BasicUnfoldingData<double>;

namespace detail {

template <class R>
R norm2(const R& a, const R& b) {
  using std::sqrt;
  return sqrt(a * a + b * b);
}

template <class R>
R max_abs(const std::array<R, 3>& v) {
  using std::abs;
  return std::max({R(abs(v[0])), R(abs(v[1])), R(abs(v[2]))});
}

/// Centered difference with one Richardson refinement; returns (value, error estimate).
template <class R, class F>
std::pair<R, R> richardson(F&& f, const R& h) {
  using std::abs;
  const R d1 = (f(h) - f(-h)) / (2 * h);
  const R h2 = h / 2;
  const R d2 = (f(h2) - f(-h2)) / (2 * h2);
  return {(4 * d2 - d1) / 3, R(abs(d2 - d1))};
}

template <class R>
bool finite(const R& v) {
  using std::isfinite;
  return isfinite(v);
}

}  // namespace detail

/// Scales for a cubic contact: T is where the quartic term overtakes the
/// cubic one (capped by t_cap), G the size of the cubic term over T.
template <class R>
FeatureScales<R> cubic_feature_scales(const GapJet<R>& g, const R& t_cap) {
  using std::abs;
  FeatureScales<R> s;
  const R g3 = abs(g.derivative(3));
  const R g4 = abs(g.derivative(4));
  s.t = g4 > 0 ? R(4 * g3 / g4) : t_cap;
  if (!(s.t < t_cap) || !detail::finite(s.t)) s.t = t_cap;
  const R t3 = s.t * s.t * s.t;
  s.g = std::max(R(g3 * t3 / 6), R(g4 * t3 * s.t / 24));
  if (!(s.g > 0)) s.g = 1;
  return s;
}

// ---------------------------------------------------------------- order --

/// Smallest n >= 1 with g^(k) negligible for k <= n and g^(n+1) significant;
/// 0 marks a transverse point. Derivatives are weighed by T^k / G.
template <class R>
int classify_order(const std::array<R, 4>& d, const FeatureScales<R>& scales = {}, const Tolerances& tol = {}) {
  using std::abs;
  std::array<R, 4> w{};
  R tk = 1;
  for (int k = 0; k < 4; ++k) {
    w[k] = abs(d[k]) * tk / scales.g;
    tk *= scales.t;
  }
  if (!(w[0] < tol.zero)) fail(ErrorKind::invalid_input, "classify_order needs |g| below tol_zero at t_star");
  if (w[1] > tol.nonzero) return 0;
  for (int n = 1; n <= 2; ++n) {
    bool low = true;
    for (int k = 1; k <= n; ++k) low = low && w[k] < tol.zero;
    if (low && w[n + 1] > tol.nonzero) return n;
  }
  bool all_low = true;
  for (int k = 1; k < 4; ++k) all_low = all_low && w[k] < tol.zero;
  if (all_low) fail(ErrorKind::unclassifiable, "all available gap derivatives vanish at t_star");
  // Derivatives in the ambiguous band between tol_zero and tol_nonzero.
  return 3;
}

template <class R>
int classify_order(const BasicGapContext<R>& ctx, const R& t_star, const FeatureScales<R>& scales = {},
                   const Tolerances& tol = {}) {
  return classify_order(gap_derivatives(ctx, t_star), scales, tol);
}

// ------------------------------------------------------------ quadratic --

namespace detail {

template <class R>
std::array<R, 3> relative_residual(const GapJet<R>& g, const FeatureScales<R>& s) {
  using std::abs;
  return {R(abs(g.derivative(0)) / s.g), R(abs(g.derivative(1)) * s.t / s.g), R(abs(g.derivative(2)) * s.t * s.t / s.g)};
}

}  // namespace detail


template <class R>
struct QuadraticOptions {
  Tolerances tol;
  int max_iter = 50;
  R residual_tol = R(1e-10);
  R fd_step = R(1e-5);  ///< 1e-5 times the parameter box size (unit box by default)
  R max_step = R(1);    ///< larger Newton steps, in units of T and of the box, count as divergence
  FeatureScales<R> scales;  ///< residuals are |g| / G and |g'| T / G
};

/// Newton on (g, g') = 0 in (t, s) along a one-parameter path.
template <class R>
BasicTangencyRecord<R> solve_quadratic_tangency(const GapPath<R>& path, const R& t0, const R& s0,
                                                const QuadraticOptions<R>& opt = {}) {
  using std::abs;
  const FeatureScales<R>& sc = opt.scales;
  R t = t0, s = s0;
  BasicTangencyRecord<R> rec;
  rec.seed = {t0, s0, R(0)};
  rec.scales = sc;
  auto eval = [&](const R& tt, const R& ss) { return gap_jet(path(ss), tt); };
  auto residual = [&](const GapJet<R>& g) { return detail::norm2(R(g.derivative(0) / sc.g), R(g.derivative(1) * sc.t / sc.g)); };
  bool converged = false;
  int it = 0;
  for (; it < opt.max_iter; ++it) {
    const BasicGapContext<R> here = path(s);
    const GapJet<R> g = gap_jet(here, t);
    const R res = residual(g);
    rec.history.push_back({it, t, here.params, res});
    if (!detail::finite(res)) fail(ErrorKind::newton_diverged, "non-finite gap during quadratic Newton");
    if (res < opt.residual_tol) {
      converged = true;
      break;
    }
    const R h = opt.fd_step;
    const GapJet<R> gp = eval(t, R(s + h));
    const GapJet<R> gm = eval(t, R(s - h));
    const R gs = (gp.derivative(0) - gm.derivative(0)) / (2 * h);
    const R g1s = (gp.derivative(1) - gm.derivative(1)) / (2 * h);
    std::array<std::array<R, 2>, 2> j{{{g.derivative(1), gs}, {g.derivative(2), g1s}}};
    std::array<R, 2> dx{};
    if (!solve_linear<R, 2>(j, {R(-g.derivative(0)), R(-g.derivative(1))}, dx))
      fail(ErrorKind::newton_diverged, "singular Jacobian in quadratic Newton");
    if (!(abs(dx[0]) < opt.max_step * sc.t && abs(dx[1]) < opt.max_step))
      fail(ErrorKind::newton_diverged, "Newton step exploded in quadratic tangency solve");
    t += dx[0];
    s += dx[1];
    const R tiny = std::numeric_limits<R>::epsilon() * 8;
    if (abs(dx[0]) <= tiny * (sc.t + abs(t)) && abs(dx[1]) <= tiny * (1 + abs(s))) {
      converged = residual(eval(t, s)) < opt.residual_tol;
      ++it;
      break;
    }
  }
  if (!converged) {
    std::ostringstream msg;
    msg << "quadratic tangency Newton did not reach residual " << to_double(opt.residual_tol) << " in " << opt.max_iter
        << " iterations";
    fail(ErrorKind::newton_diverged, msg.str());
  }
  const BasicGapContext<R> ctx = path(s);
  const GapJet<R> g = gap_jet(ctx, t);
  rec.iterations = it;
  rec.t_star = t;
  rec.params = ctx.params;
  rec.path_param = s;
  const Germ<kJetOrder, R> c = ctx.unstable(t);
  rec.location = {c.x.value(), c.y.value()};
  rec.g_derivs = {g.derivative(0), g.derivative(1), g.derivative(2), g.derivative(3)};
  rec.relative_residual = detail::relative_residual(g, sc);
  if (!(abs(g.derivative(2)) * sc.t * sc.t / sc.g > opt.tol.nonzero))
    fail(ErrorKind::order_ambiguous, "|g''| below tol_nonzero at the solution; candidate for cubic refinement");
  rec.order = 1;
  // d/ds of g at fixed t equals the critical-height derivative to first order.
  auto [gs, err] = detail::richardson([&](const R& h) { return R(eval(t, R(s + h)).derivative(0)); }, opt.fd_step);
  rec.genericity.velocity_diff = {R(0), gs};
  rec.genericity.fd_step = opt.fd_step;
  rec.genericity.fd_error = err;
  rec.genericity.condition_estimate =
      abs(gs) > 0 ? R(abs(g.derivative(2)) * sc.t * sc.t / abs(gs)) : std::numeric_limits<R>::infinity();
  rec.genericity.certified = abs(gs) / sc.g > opt.tol.generic && abs(gs) > 10 * err;
  return rec;
}

/// Quadratic tangency at fixed b, unknowns (t, a).
template <class R>
BasicTangencyRecord<R> find_quadratic_tangency(const GapFamily<R>& family, const R& b, const R& t0, const R& a0,
                                               const QuadraticOptions<R>& opt = {}) {
  GapPath<R> path = [&family, b](const R& a) { return family(BasicParams<R>{a, b}); };
  BasicTangencyRecord<R> rec = solve_quadratic_tangency(path, t0, a0, opt);
  rec.seed = {t0, a0, b};
  if (!rec.genericity.certified)
    fail(ErrorKind::degenerate_unfolding, "dg/da does not clear tol_generic at the quadratic tangency");
  return rec;
}

// --------------------------------------------------------- velocities --

template <class R>
struct VelocityOptions {
  R initial_step = R(1e-5);
  R rel_accuracy = R(1e-6);
  int max_halvings = 12;
};

/// Critical point of g near t (Newton on g').
template <class R>
R critical_point(const BasicGapContext<R>& ctx, R t, int max_iter = 60) {
  using std::abs;
  for (int i = 0; i < max_iter; ++i) {
    const GapJet<R> g = gap_jet(ctx, t);
    if (g.derivative(2) == 0) fail(ErrorKind::newton_diverged, "flat g' while tracking the critical point");
    const R step = g.derivative(1) / g.derivative(2);
    t -= step;
    if (abs(step) <= std::numeric_limits<R>::epsilon() * 8 * (1 + abs(t))) break;
  }
  return t;
}

/// (0, d/ds g(critical point)) with Ridders extrapolation of centered differences.
template <class R>
Vec2T<R> unfolding_velocity(const GapPath<R>& path, const R& s0, const R& t_star, const VelocityOptions<R>& opt = {}) {
  using std::abs;
  auto height = [&](const R& s) {
    const BasicGapContext<R> ctx = path(s);
    return R(gap_jet(ctx, critical_point(ctx, t_star)).derivative(0));
  };
  constexpr int kTable = 10;
  std::array<std::array<R, kTable>, kTable> tab{};
  R h = opt.initial_step;
  R best = 0, best_err = std::numeric_limits<R>::infinity();
  const R con = R(1.4), con2 = con * con;
  int rows = std::min(kTable, opt.max_halvings);
  for (int i = 0; i < rows; ++i) {
    tab[0][i] = (height(s0 + h) - height(s0 - h)) / (2 * h);
    R fac = con2;
    for (int j = 1; j <= i; ++j) {
      tab[j][i] = (tab[j - 1][i] * fac - tab[j - 1][i - 1]) / (fac - 1);
      fac *= con2;
      const R err = std::max(R(abs(tab[j][i] - tab[j - 1][i])), R(abs(tab[j][i] - tab[j - 1][i - 1])));
      if (err <= best_err) {
        best_err = err;
        best = tab[j][i];
      }
    }
    if (i > 0 && abs(tab[i][i] - tab[i - 1][i - 1]) >= 2 * best_err) break;
    h /= con;
  }
  if (!(best_err <= opt.rel_accuracy * std::max(R(abs(best)), R(1e-300))))
    fail(ErrorKind::step_underflow, "finite differences could not reach the requested accuracy");
  return {R(0), best};
}

enum class ContactKind { making, breaking };

inline std::string to_string(ContactKind k) { return k == ContactKind::making ? "making" : "breaking"; }

/// Making when intersections are created as s increases: the critical
/// height moves against the curvature sign.
template <class R>
ContactKind classify_contact(const R& g2, const R& dg_ds, const R& tol = R(1e-12)) {
  using std::abs;
  if (!(abs(dg_ds) > tol)) fail(ErrorKind::indeterminate, "critical height does not move with the parameter");
  if (g2 == 0) fail(ErrorKind::indeterminate, "zero curvature at the tangency");
  return (g2 > 0) != (dg_ds > 0) ? ContactKind::making : ContactKind::breaking;
}

template <class R>
ContactKind classify_contact(const BasicTangencyRecord<R>& rec, const GapPath<R>& path, const R& s0,
                             const VelocityOptions<R>& opt = {}, const R& tol = R(1e-12)) {
  if (rec.order != 1) fail(ErrorKind::invalid_input, "classify_contact needs a quadratic tangency");
  const Vec2T<R> v = unfolding_velocity(path, s0, rec.t_star, opt);
  return classify_contact(rec.g_derivs[2], v.y, tol);
}

// ---------------------------------------------------------------- cubic --

template <class R>
struct CubicOptions {
  Tolerances tol;
  int max_iter = 50;
  R fd_rel = R(1e-5);   ///< finite-difference step relative to the parameter box
  R param_box = R(0);   ///< 0: derived from the residual sensitivities at the seed
  R t_cap = R(1);       ///< upper bound for the length unit T
  std::function<void(const NewtonStep<R>&)> log;
};

namespace detail {

// Parameter derivatives of (g, g', g'') at fixed t.
template <class R>
struct ParamDerivs {
  std::array<R, 3> da{}, db{};
  std::array<R, 3> err_a{}, err_b{};
};

template <class R>
ParamDerivs<R> param_derivatives(const GapFamily<R>& family, const R& t, const BasicParams<R>& p, const R& ha,
                                 const R& hb) {
  using std::abs;
  ParamDerivs<R> out;
  auto vec = [&](const BasicParams<R>& q) {
    const GapJet<R> g = gap_jet(family(q), t);
    return std::array<R, 3>{g.derivative(0), g.derivative(1), g.derivative(2)};
  };
  auto diff = [&](bool along_a, const R& h, std::array<R, 3>& d, std::array<R, 3>& e) {
    auto at = [&](const R& step) {
      BasicParams<R> q = p;
      (along_a ? q.a : q.b) += step;
      return vec(q);
    };
    const auto p1 = at(h), m1 = at(R(-h)), p2 = at(R(h / 2)), m2 = at(R(-h / 2));
    for (int i = 0; i < 3; ++i) {
      const R d1 = (p1[i] - m1[i]) / (2 * h);
      const R d2 = (p2[i] - m2[i]) / h;
      d[i] = (4 * d2 - d1) / 3;
      e[i] = abs(d2 - d1);
    }
  };
  diff(true, ha, out.da, out.err_a);
  diff(false, hb, out.db, out.err_b);
  return out;
}

}  // namespace detail

/// Parameter change that moves the scaled cubic residual by one unit.
template <class R>
std::pair<R, R> cubic_parameter_box(const GapFamily<R>& family, const R& t, const BasicParams<R>& p,
                                    const FeatureScales<R>& sc) {
  using std::abs;
  using std::sqrt;
  const R pilot = sqrt(std::numeric_limits<R>::epsilon()) * (1 + abs(p.a) + abs(p.b));
  const auto pd = detail::param_derivatives(family, t, p, pilot, pilot);
  R sa = 0, sb = 0;
  const R wt[3] = {R(1 / sc.g), R(sc.t / sc.g), R(sc.t * sc.t / sc.g)};
  for (int i = 0; i < 3; ++i) {
    sa = std::max(sa, R(abs(pd.da[i]) * wt[i]));
    sb = std::max(sb, R(abs(pd.db[i]) * wt[i]));
  }
  if (!(sa > 0) || !(sb > 0)) fail(ErrorKind::degenerate_unfolding, "gap does not depend on one of the parameters");
  return {R(1 / sa), R(1 / sb)};
}

/// |g'''| against the summed magnitudes of the terms it is made of (y''' and
/// the chain-rule terms of eta(x(t))); small values mean g''' is lost to
/// cancellation. Invariant under rescaling t and y.
template <class R>
R third_derivative_ratio(const BasicGapContext<R>& ctx, const R& t) {
  using std::abs;
  const Germ<kJetOrder, R> c = ctx.unstable(t);
  const GapJet<R> e = ctx.stable(c.x.value());
  const R x1 = c.x.coeff(1), x2 = c.x.coeff(2), x3 = c.x.coeff(3);
  const R y3 = c.y.coeff(3);
  const R t1 = e.coeff(1) * x3, t2 = 2 * e.coeff(2) * x1 * x2, t3 = e.coeff(3) * x1 * x1 * x1;
  const R scale = abs(y3) + abs(t1) + abs(t2) + abs(t3);
  if (!(scale > 0)) return R(0);
  return abs(y3 - t1 - t2 - t3) / scale;
}

template <class R>
struct CubicMeasurement {
  GapJet<R> jet;
  Vec2T<R> location;
  FeatureScales<R> scales;
  std::array<R, 3> relative_residual{};
  R relative_g3 = 0;
  R box_a = 0, box_b = 0;
  std::array<std::array<R, 3>, 2> param_grad{};  ///< d/da and d/db of (g, g', g'')
  BasicUnfoldingData<R> genericity;
};

/// Residuals and unfolding determinant of (g, g', g'') at (t, a, b), all
/// rebuilt from the family.
template <class R>
CubicMeasurement<R> measure_cubic(const GapFamily<R>& family, const R& t, const BasicParams<R>& p,
                                  const CubicOptions<R>& opt = {}) {
  using std::abs;
  CubicMeasurement<R> m;
  const BasicGapContext<R> ctx = family(p);
  m.jet = gap_jet(ctx, t);
  const Germ<kJetOrder, R> c = ctx.unstable(t);
  m.location = {c.x.value(), c.y.value()};
  m.scales = cubic_feature_scales(m.jet, opt.t_cap);
  const FeatureScales<R>& sc = m.scales;
  m.relative_residual = detail::relative_residual(m.jet, sc);
  m.relative_g3 = third_derivative_ratio(ctx, t);
  if (opt.param_box > 0) {
    m.box_a = m.box_b = opt.param_box;
  } else {
    std::tie(m.box_a, m.box_b) = cubic_parameter_box(family, t, p, sc);
  }
  const R ha = opt.fd_rel * m.box_a, hb = opt.fd_rel * m.box_b;
  const auto pd = detail::param_derivatives(family, t, p, ha, hb);
  m.param_grad = {pd.da, pd.db};
  const R det = pd.da[0] * pd.db[1] - pd.db[0] * pd.da[1];
  const R det_err = abs(pd.err_a[0] * pd.db[1]) + abs(pd.da[0] * pd.err_b[1]) + abs(pd.err_b[0] * pd.da[1]) +
                    abs(pd.db[0] * pd.err_a[1]);
  const R n0 = detail::norm2(pd.da[0], pd.db[0]);
  const R n1 = detail::norm2(pd.da[1], pd.db[1]);
  auto& u = m.genericity;
  u.det_a1a4_a2a3 = det;
  u.det_normalized = (n0 > 0 && n1 > 0) ? R(det / (n0 * n1)) : R(0);
  u.fd_step = std::max(ha, hb);
  u.fd_error = det_err;
  u.condition_estimate = u.det_normalized != 0 ? R(1 / abs(u.det_normalized)) : std::numeric_limits<R>::infinity();
  u.certified = abs(u.det_normalized) > opt.tol.generic && abs(det) > 10 * det_err;
  return m;
}

/// Square system (g, g', g'') = 0 in (t, a, b), scaled by the feature units.
template <class R>
BasicTangencyRecord<R> find_cubic_tangency(const GapFamily<R>& family, const R& t0, const BasicParams<R>& p0,
                                           const CubicOptions<R>& opt = {}) {
  using std::abs;
  BasicTangencyRecord<R> rec;
  rec.seed = {t0, p0.a, p0.b};
  R t = t0;
  BasicParams<R> p = p0;

  GapJet<R> g = gap_jet(family(p), t);
  FeatureScales<R> sc = cubic_feature_scales(g, opt.t_cap);
  R box_a = opt.param_box, box_b = opt.param_box;
  if (!(opt.param_box > 0)) std::tie(box_a, box_b) = cubic_parameter_box(family, t, p, sc);
  const R ha = opt.fd_rel * box_a, hb = opt.fd_rel * box_b;

  auto residual_norm = [](const GapJet<R>& gj, const FeatureScales<R>& s) {
    return detail::max_abs(detail::relative_residual(gj, s));
  };

  R res = residual_norm(g, sc);
  int it = 0;
  for (; it < opt.max_iter; ++it) {
    NewtonStep<R> step{it, t, p, res};
    rec.history.push_back(step);
    if (opt.log) opt.log(step);
    if (!detail::finite(res)) fail(ErrorKind::newton_diverged, "non-finite residual in cubic Newton");

    const auto pd = detail::param_derivatives(family, t, p, ha, hb);
    // Rows scaled to unit residuals; columns in t, a, b.
    const R wt[3] = {R(1 / sc.g), R(sc.t / sc.g), R(sc.t * sc.t / sc.g)};
    std::array<std::array<R, 3>, 3> j{};
    std::array<R, 3> rhs{};
    for (int i = 0; i < 3; ++i) {
      j[i][0] = g.derivative(i + 1) * wt[i];
      j[i][1] = pd.da[i] * wt[i];
      j[i][2] = pd.db[i] * wt[i];
      rhs[i] = -g.derivative(i) * wt[i];
    }
    std::array<R, 3> dx{};
    if (!solve_linear<R, 3>(j, rhs, dx)) fail(ErrorKind::newton_diverged, "singular Jacobian in cubic Newton");
    const R step_size = std::max({R(abs(dx[0]) / sc.t), R(abs(dx[1]) / box_a), R(abs(dx[2]) / box_b)});
    if (!(step_size < R(1e6))) fail(ErrorKind::newton_diverged, "Newton step exploded in cubic tangency solve");

    // Damped update: accept the first step length that lowers the residual.
    R lambda = 1;
    bool accepted = false;
    R t_new = t;
    BasicParams<R> p_new = p;
    GapJet<R> g_new;
    for (int k = 0; k < 12 && !accepted; ++k, lambda /= 2) {
      t_new = t + lambda * dx[0];
      p_new = {p.a + lambda * dx[1], p.b + lambda * dx[2]};
      try {
        g_new = gap_jet(family(p_new), t_new);
        const R r = residual_norm(g_new, sc);
        accepted = detail::finite(r) && r < res;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::out_of_domain && e.kind() != ErrorKind::not_a_graph) throw;
      }
    }
    if (!accepted) {
      // At the rounding floor no step improves the residual.
      if (res < opt.tol.zero) break;
      fail(ErrorKind::newton_diverged, "cubic Newton could not reduce the residual");
    }
    t = t_new;
    p = p_new;
    g = g_new;
    sc = cubic_feature_scales(g, opt.t_cap);
    res = residual_norm(g, sc);
    if (step_size < std::numeric_limits<R>::epsilon() * 64) {
      ++it;
      break;
    }
  }
  if (!(res < opt.tol.zero)) {
    std::ostringstream msg;
    msg << "cubic Newton stopped with relative residual " << to_double(res);
    fail(ErrorKind::newton_diverged, msg.str());
  }

  const CubicMeasurement<R> m = measure_cubic(family, t, p, opt);
  rec.iterations = it;
  rec.t_star = t;
  rec.params = p;
  rec.location = m.location;
  rec.g_derivs = {m.jet.derivative(0), m.jet.derivative(1), m.jet.derivative(2), m.jet.derivative(3)};
  rec.scales = m.scales;
  rec.relative_residual = m.relative_residual;
  rec.relative_g3 = m.relative_g3;
  rec.genericity = m.genericity;
  if (!(rec.relative_g3 > opt.tol.nonzero)) fail(ErrorKind::order_too_high, "|g'''| below tol_nonzero at the cubic point");
  rec.order = 2;
  if (!rec.genericity.certified)
    fail(ErrorKind::degenerate_unfolding, "unfolding determinant not distinguishable from zero");
  return rec;
}

}  // namespace henon_lab
