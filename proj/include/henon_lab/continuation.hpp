#pragma once

// The tangency curve a = h(b) near (-2, 0), the heteroclinic cycle closing on
// it, the cubic homoclinic tangency of p+ born next to the cycle, and the
// antimonotone pairs unfolding from it.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "henon_lab/error.hpp"
#include "henon_lab/henon.hpp"
#include "henon_lab/manifold.hpp"
#include "henon_lab/numeric.hpp"
#include "henon_lab/scene.hpp"
#include "henon_lab/tangency.hpp"

namespace henon_lab {

// ------------------------------------------------------------- h(b) ----

struct ContinuationOptions {
  SceneOptions scene;
  QuadraticOptions<double> newton;
  double min_step = 1e-8;
  double max_step = 0.01;
  int grow_after = 4;  ///< clean accepts before the step doubles
};

struct ContinuationSample {
  double b = 0, a = 0, t_star = 0, residual = 0, velocity_a = 0;
};

struct ContinuationCurve {
  std::vector<ContinuationSample> samples;
  int direction = 0;  ///< sign of the b progression
};

/// Scene options without preimage leaves, for gaps that never use them.
inline SceneOptions without_leaves(SceneOptions opt) {
  opt.max_leaf_depth = 0;
  return opt;
}

inline GapFamily<double> q_plus_family(const SceneOptions& opt) {
  const SceneOptions o = without_leaves(opt);
  return [o](const Params& p) { return q_plus_context(make_scene(p, o)); };
}

/// q+ at fixed b: phi^2(l-) tangent to S+, solved in (t, a).
inline TangencyRecord quadratic_q_plus(double b, double t0, double a0, const ContinuationOptions& opt = {}) {
  TangencyRecord rec = find_quadratic_tangency<double>(q_plus_family(opt.scene), b, t0, a0, opt.newton);
  rec.kind = TangencyKind::heteroclinic;
  rec.saddle_pair = {Branch::minus, Branch::plus};
  rec.iterate_depth = opt.scene.image_power;
  return rec;
}

inline ContinuationSample to_sample(const TangencyRecord& rec) {
  return {rec.params.b, rec.params.a, rec.t_star, rec.history.empty() ? 0.0 : rec.history.back().residual,
          rec.genericity.velocity_diff.y};
}

/// Natural continuation in b from a converged anchor.
inline ContinuationCurve continue_quadratic_curve(const TangencyRecord& anchor, double b_end, double step0,
                                                  const ContinuationOptions& opt = {}) {
  if (!(step0 > 0)) fail(ErrorKind::invalid_input, "continuation step must be positive");
  if (!std::isfinite(b_end)) fail(ErrorKind::invalid_input, "continuation end must be finite");
  ContinuationCurve curve;
  curve.samples.push_back(to_sample(anchor));
  const double b_start = anchor.params.b;
  curve.direction = b_end > b_start ? 1 : (b_end < b_start ? -1 : 0);
  double step = std::min(step0, opt.max_step);
  int clean = 0;
  while (curve.direction != 0 && curve.samples.back().b != b_end) {
    const ContinuationSample& last = curve.samples.back();
    const double h = std::min(step, std::abs(b_end - last.b));
    const double b = std::abs(b_end - last.b) <= h ? b_end : last.b + curve.direction * h;
    double a_pred = last.a, t_pred = last.t_star;
    if (curve.samples.size() >= 2) {
      const ContinuationSample& prev = curve.samples[curve.samples.size() - 2];
      const double r = (b - last.b) / (last.b - prev.b);
      a_pred += r * (last.a - prev.a);
      t_pred += r * (last.t_star - prev.t_star);
    }
    try {
      curve.samples.push_back(to_sample(quadratic_q_plus(b, t_pred, a_pred, opt)));
      if (++clean >= opt.grow_after) {
        step = std::min(2 * step, opt.max_step);
        clean = 0;
      }
    } catch (const Error& e) {
      step /= 2;
      clean = 0;
      if (step < opt.min_step) {
        std::ostringstream msg;
        msg << "step fell below " << opt.min_step << " at b = " << b << " (" << e.what()
            << "); last good sample b = " << last.b << ", a = " << last.a;
        fail(ErrorKind::continuation_stalled, msg.str());
      }
    }
  }
  return curve;
}

/// Anchor from the seed (t, a) = (0, -2 + 2 b), which sits in the Newton basin for small b.
inline ContinuationCurve continue_quadratic_curve(double b_start, double b_end, double step0,
                                                  const ContinuationOptions& opt = {}) {
  if (!(step0 > 0)) fail(ErrorKind::invalid_input, "continuation step must be positive");
  return continue_quadratic_curve(quadratic_q_plus(b_start, 0.0, -2.0 + 2.0 * b_start, opt), b_end, step0, opt);
}

// ----------------------------------------------------------- cycle ----

struct CycleOptions {
  ContinuationOptions continuation;
  int min_leaf = 0;
  int max_leaf = 3;
  double b_tol = 1e-12;
  int max_bisections = 80;
  int profile_points = 201;  ///< grid used to find the tip of l-hat+
  double orbit_tol = 1e-6;
  int orbit_max_iter = 60;
  double slope_step = 1e-5;  ///< difference step for h'(b0)
};

struct OrbitCheck {
  double forward_distance = 0;
  int forward_steps = 0;
  double backward_distance = 0;
  double backward_consistency = 0;  ///< distance from the end of the backward orbit, mapped forward, to the point
  int backward_steps = 0;
  bool ok = false;
};

struct CycleConfig {
  double b0 = 0, a0 = 0;
  double h_slope = 0;  ///< dh/db at b0
  TangencyRecord q_plus, q_minus;
  int leaf_depth = -1;
  OrbitCheck q_plus_orbit, q_minus_orbit;
  std::vector<std::pair<double, double>> gap_profile;  ///< (b, tip gap) at the curve samples for leaf_depth
};

struct Tip {
  double t = 0;
  double gap = 0;
};

/// Critical point of the gap with the smallest |g| (the closest approach of
/// the unstable arc to the stable graph).
inline std::optional<Tip> gap_tip(const GapContext& ctx, int grid = 201) {
  std::vector<double> ts, d1;
  for (int i = 0; i < grid; ++i) {
    const double t = ctx.t_lo + (ctx.t_hi - ctx.t_lo) * i / (grid - 1);
    try {
      d1.push_back(gap_jet(ctx, t).derivative(1));
      ts.push_back(t);
    } catch (const Error&) {
      d1.push_back(std::numeric_limits<double>::quiet_NaN());
      ts.push_back(t);
    }
  }
  std::optional<Tip> best;
  for (std::size_t i = 1; i < ts.size(); ++i) {
    if (!std::isfinite(d1[i - 1]) || !std::isfinite(d1[i]) || (d1[i - 1] > 0) == (d1[i] > 0)) continue;
    try {
      const double t = critical_point(ctx, 0.5 * (ts[i - 1] + ts[i]));
      if (t < ts[i - 1] - (ts[i] - ts[i - 1]) || t > ts[i] + (ts[i] - ts[i - 1])) continue;
      const double g = gap_jet(ctx, t).value();
      if (!best || std::abs(g) < std::abs(best->gap)) best = Tip{t, g};
    } catch (const Error&) {
    }
  }
  return best;
}

inline OrbitCheck check_orbit(const Params& p, Point2 q, const FixedPointData& forward_to, const HoldingFunction& curve,
                              double t, int power, double tol, int max_iter) {
  OrbitCheck c;
  c.forward_distance = distance(q, forward_to.location);
  Point2 z = q;
  for (int k = 1; k <= max_iter; ++k) {
    z = apply(p, z);
    const double d = distance(z, forward_to.location);
    if (!std::isfinite(d) || norm(z) > 1e3) break;
    if (d < c.forward_distance) {
      c.forward_distance = d;
      c.forward_steps = k;
    }
  }
  // Backward orbit through the local unstable parametrization.
  const LocalManifold& w = curve.source();
  const GraphAnchor at = curve.locate(t);
  double s = at.s;
  int steps = at.depth + power;
  for (int k = 0; k < max_iter && distance(w.point(s), w.fp.location) >= tol / 10; ++k) {
    s /= w.multiplier;
    steps += w.iterate;
  }
  c.backward_distance = distance(w.point(s), w.fp.location);
  c.backward_steps = steps;
  c.backward_consistency = distance(iterate(p, w.point(s), steps), q);
  c.ok = c.forward_distance < tol && c.backward_distance < tol && c.backward_consistency < tol;
  return c;
}

/// Closes the cycle: finds b0 where phi^2(l+) becomes tangent to a stable leaf
/// of p-, using the smallest leaf depth whose tip gap changes sign along the curve.
inline CycleConfig find_secondary_tangency(const ContinuationCurve& curve, const CycleOptions& opt = {}) {
  if (curve.samples.size() < 2) fail(ErrorKind::invalid_input, "secondary tangency needs at least two curve samples");
  const ContinuationOptions& copt = opt.continuation;
  auto scene_at = [&](const Params& p, int k) {
    SceneOptions so = copt.scene;
    so.max_leaf_depth = k;
    return make_scene(p, so);
  };
  auto tip_at = [&](const Params& p, int k) {
    const Scene sc = scene_at(p, k);
    auto tip = gap_tip(q_minus_context(sc, k), opt.profile_points);
    if (!tip) fail(ErrorKind::out_of_domain, "no critical point of the q- gap in the working window");
    return *tip;
  };

  std::ostringstream report;
  int leaf = -1;
  std::size_t bracket = 0;
  std::vector<std::pair<double, double>> profile;
  for (int k = opt.min_leaf; k <= opt.max_leaf && leaf < 0; ++k) {
    profile.clear();
    std::vector<double> vals;
    for (const ContinuationSample& s : curve.samples) {
      double v = std::numeric_limits<double>::quiet_NaN();
      try {
        v = tip_at({s.a, s.b}, k).gap;
      } catch (const Error&) {
      }
      profile.emplace_back(s.b, v);
      vals.push_back(v);
    }
    report << " leaf " << k << ":";
    for (const auto& [b, v] : profile) report << " (" << b << ", " << v << ")";
    for (std::size_t i = 1; i < vals.size(); ++i) {
      if (std::isfinite(vals[i - 1]) && std::isfinite(vals[i]) && (vals[i - 1] > 0) != (vals[i] > 0)) {
        leaf = k;
        bracket = i;
        break;
      }
    }
  }
  if (leaf < 0) fail(ErrorKind::no_sign_change, "tip gap keeps its sign along the curve;" + report.str());

  const ContinuationSample lo_s = curve.samples[bracket - 1], hi_s = curve.samples[bracket];
  double a_guess = lo_s.a, tq_guess = lo_s.t_star;
  auto interp = [&](double b) {
    const double r = (b - lo_s.b) / (hi_s.b - lo_s.b);
    a_guess = lo_s.a + r * (hi_s.a - lo_s.a);
    tq_guess = lo_s.t_star + r * (hi_s.t_star - lo_s.t_star);
  };
  auto h_of = [&](double b) {
    const TangencyRecord r = quadratic_q_plus(b, tq_guess, a_guess, copt);
    a_guess = r.params.a;
    tq_guess = r.t_star;
    return r;
  };
  double b_lo = lo_s.b, b_hi = hi_s.b;
  double g_lo = profile[bracket - 1].second;
  Tip tip = tip_at({lo_s.a, lo_s.b}, leaf);
  for (int it = 0; it < opt.max_bisections && std::abs(b_hi - b_lo) > opt.b_tol; ++it) {
    const double bm = 0.5 * (b_lo + b_hi);
    interp(bm);
    const TangencyRecord r = h_of(bm);
    tip = tip_at(r.params, leaf);
    if ((tip.gap > 0) == (g_lo > 0)) {
      b_lo = bm;
      g_lo = tip.gap;
    } else {
      b_hi = bm;
    }
  }

  // Newton polish of (g, g') = 0 in (t, b) along a = h(b).
  const double b_mid = 0.5 * (b_lo + b_hi);
  interp(b_mid);
  GapPath<double> path = [&](const double& b) {
    const TangencyRecord r = h_of(b);
    SceneOptions so = copt.scene;
    so.max_leaf_depth = leaf;
    return q_minus_context(make_scene(r.params, so), leaf);
  };
  TangencyRecord qm = solve_quadratic_tangency(path, tip.t, b_mid, copt.newton);
  qm.kind = TangencyKind::heteroclinic;
  qm.saddle_pair = {Branch::plus, Branch::minus};
  qm.leaf_depth = leaf;
  qm.iterate_depth = copt.scene.image_power;

  CycleConfig cyc;
  cyc.b0 = qm.params.b;
  cyc.leaf_depth = leaf;
  cyc.gap_profile = profile;
  cyc.q_plus = quadratic_q_plus(cyc.b0, tq_guess, a_guess, copt);
  cyc.a0 = cyc.q_plus.params.a;
  cyc.q_minus = qm;
  {
    const double d = opt.slope_step;
    const double ap = quadratic_q_plus(cyc.b0 + d, cyc.q_plus.t_star, cyc.a0, copt).params.a;
    const double am = quadratic_q_plus(cyc.b0 - d, cyc.q_plus.t_star, cyc.a0, copt).params.a;
    cyc.h_slope = (ap - am) / (2 * d);
  }
  const Params p0{cyc.a0, cyc.b0};
  SceneOptions so = copt.scene;
  so.max_leaf_depth = leaf;
  const Scene sc = make_scene(p0, so);
  cyc.q_plus_orbit = check_orbit(p0, cyc.q_plus.location, sc.plus, *sc.l_minus, cyc.q_plus.t_star, so.image_power,
                                 opt.orbit_tol, opt.orbit_max_iter);
  cyc.q_minus_orbit = check_orbit(p0, cyc.q_minus.location, sc.minus, *sc.l_plus, cyc.q_minus.t_star, so.image_power,
                                  opt.orbit_tol, opt.orbit_max_iter);
  return cyc;
}

// ------------------------------------------------------ cubic hunt ----

struct PreciseFamilyOptions {
  int degree = 60;
  double unstable_scale = 200;
  double stable_scale = 500;
  double x_lo = -2.4;
  double x_hi = -1.6;
};

/// Where the homoclinic gap lives: W^u(p+) at unstable_depth forward steps
/// against W^s(p+) at stable_depth inverse steps.
struct HomoclinicAddress {
  int unstable_depth = 0;
  int stable_depth = 0;
  Real sigma_seed = 0;  ///< stable parameter near the contact
};

inline BasicGapContext<Real> homoclinic_context(const BasicParams<Real>& p, const HomoclinicAddress& addr,
                                                const PreciseFamilyOptions& opt) {
  using std::abs;
  const auto fps = fixed_points(p);
  const auto& fp = fps.first;
  auto wu = std::make_shared<const BasicLocalManifold<Real>>(solve_local_manifold(
      fp, ManifoldKind::unstable, opt.degree, 0, default_validity_tolerance<Real>(), Real(opt.unstable_scale)));
  auto ws = std::make_shared<const BasicLocalManifold<Real>>(solve_local_manifold(
      fp, ManifoldKind::stable, opt.degree, 0, default_validity_tolerance<Real>(), Real(opt.stable_scale)));
  auto seed = std::make_shared<Real>(addr.sigma_seed);
  BasicGapContext<Real> ctx;
  ctx.params = p;
  ctx.unstable = [wu, d = addr.unstable_depth](const Real& s) { return wu->global_germ<kJetOrder>(d, s); };
  ctx.stable = [ws, d = addr.stable_depth, seed](const Real& x) {
    Real sg = *seed;
    bool converged = false;
    for (int it = 0; it < 100 && !converged; ++it) {
      const Germ<1, Real> g = ws->global_germ<1>(d, sg);
      if (g.x.coeff(1) == 0) fail(ErrorKind::not_a_graph, "stable curve is vertical");
      const Real step = (g.x.value() - x) / g.x.coeff(1);
      sg -= step;
      if (abs(sg) > Real(1.5)) fail(ErrorKind::out_of_domain, "stable parameter left the certified interval");
      converged = abs(step) <= std::numeric_limits<Real>::epsilon() * 16 * (1 + abs(sg));
    }
    if (!converged) fail(ErrorKind::out_of_domain, "stable curve does not reach the requested x");
    *seed = sg;
    const Germ<kJetOrder, Real> s = ws->global_germ<kJetOrder>(d, sg);
    return graph_over(s.x, s.y).recenter(x - s.x.value());
  };
  ctx.x_lo = opt.x_lo;
  ctx.x_hi = opt.x_hi;
  ctx.t_lo = -1;
  ctx.t_hi = 1;
  return ctx;
}

inline GapFamily<Real> homoclinic_family(const HomoclinicAddress& addr, const PreciseFamilyOptions& opt) {
  return [addr, opt](const BasicParams<Real>& p) { return homoclinic_context(p, addr, opt); };
}

struct CubicHuntOptions {
  CycleOptions cycle;
  int min_power = 3;
  int max_power = 16;
  int power = 0;  ///< 0 picks the smallest power with a fold
  double nu_min = 1e-5;
  double nu_max = 0.0225;
  double log_step = 0.0025;  ///< grid spacing in decades of nu
  double landing_tol = 0.15;
  PreciseFamilyOptions precise;
  PreciseFamilyOptions verify{64, 160, 400};
  double k0_fd_step = 1e-22;
  int k0_max_iter = 40;
  double trust_radius = 0.05;
  CubicOptions<Real> newton;
};

struct CubicVerification {
  Real t = 0;
  std::array<Real, 3> relative_residual{};
  Real relative_g3 = 0;
  BasicUnfoldingData<Real> genericity;
  PreciseFamilyOptions family;
  bool passed = false;
};

struct CubicHuntResult {
  BasicTangencyRecord<Real> record;
  int power = 0;  ///< the curve is phi^power(l+)
  double nu_fold = 0;
  BasicParams<Real> k0_point;  ///< where g = g'' = 0 at the inflection of the folded arc
  Real center_t = 0;
  Real model_offset = 0;
  HomoclinicAddress address;
  CubicVerification verification;
  std::vector<std::string> log;
};

namespace detail {

inline std::string step_line(const char* stage, const NewtonStep<Real>& s) {
  std::ostringstream os;
  os << stage << " it=" << s.iteration << " t=" << to_decimal(s.t) << " a=" << to_decimal(s.params.a)
     << " b=" << to_decimal(s.params.b) << " residual=" << to_double(s.residual);
  return os.str();
}

/// Root of g^(k) in t by Newton, for k <= 3.
inline Real derivative_root(const BasicGapContext<Real>& ctx, Real t, int k) {
  using std::abs;
  for (int it = 0; it < 80; ++it) {
    const GapJet<Real> g = gap_jet(ctx, t);
    if (g.derivative(k + 1) == 0) fail(ErrorKind::newton_diverged, "flat derivative in the inflection search");
    const Real step = g.derivative(k) / g.derivative(k + 1);
    t -= step;
    if (abs(step) <= std::numeric_limits<Real>::epsilon() * 64 * (1 + abs(t))) return t;
  }
  fail(ErrorKind::newton_diverged, "inflection search did not converge");
}

}  // namespace detail

inline CubicHuntResult locate_cubic_from_cycle(const CycleConfig& cycle, const CubicHuntOptions& opt = {}) {
  using std::abs;
  if (opt.trust_radius <= 0 || opt.nu_min <= 0 || opt.nu_max <= opt.nu_min || opt.log_step <= 0)
    fail(ErrorKind::invalid_input, "cubic hunt needs a positive trust radius and a valid nu range");
  if (cycle.leaf_depth < 0) fail(ErrorKind::invalid_input, "cycle has no leaf depth");
  CubicHuntResult out;
  const int leaf = cycle.leaf_depth;
  SceneOptions so = opt.cycle.continuation.scene;
  so.max_leaf_depth = leaf;
  auto line = [&](double nu) { return Params{cycle.a0 + cycle.h_slope * nu, cycle.b0 + nu}; };
  const int lo_power = opt.power > 0 ? opt.power : opt.min_power;
  const int hi_power = opt.power > 0 ? opt.power : opt.max_power;

  // Stage 1: follow the tip of phi^2(l+) forward and record where its orbit
  // lands across l- near q+ for each power.
  struct Hit {
    int power;
    double nu_hi, nu_lo;
  };
  std::vector<Hit> hits;
  std::vector<double> prev(static_cast<std::size_t>(hi_power) + 1, std::numeric_limits<double>::quiet_NaN());
  double prev_nu = 0;
  double t_seed = cycle.q_minus.t_star;
  const double t_q = cycle.q_plus.t_star;
  auto tip_at = [&](const Scene& sc, double seed) -> std::optional<double> {
    const GapContext ctx = q_minus_context(sc, leaf);
    try {
      return critical_point(ctx, seed);
    } catch (const Error&) {
      auto tip = gap_tip(ctx, opt.cycle.profile_points);
      if (!tip) return std::nullopt;
      return tip->t;
    }
  };
  const int n_grid = static_cast<int>(std::floor((std::log10(opt.nu_max) - std::log10(opt.nu_min)) / opt.log_step)) + 1;
  for (int i = 0; i < n_grid; ++i) {
    const double nu = std::pow(10.0, std::log10(opt.nu_max) - i * opt.log_step);
    std::optional<double> tip;
    Scene sc;
    try {
      sc = make_scene(line(nu), so);
      tip = tip_at(sc, t_seed);
    } catch (const Error&) {
    }
    if (!tip) {
      std::fill(prev.begin(), prev.end(), std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    t_seed = *tip;
    Point2 z{sc.l_plus->value(*tip), *tip};
    const double hw = so.l_half_width;
    for (int j = 1; j + 2 <= hi_power; ++j) {
      z = apply(sc.params, z);
      if (!(norm(z) < 10)) break;
      const int m = j + 2;
      double d = std::numeric_limits<double>::quiet_NaN();
      if (std::abs(z.y) < hw && std::abs(z.x - sc.l_minus->value(z.y)) < opt.landing_tol) d = z.y - t_q;
      const double pd = prev[static_cast<std::size_t>(m)];
      if (m >= lo_power && std::isfinite(d) && std::isfinite(pd) && (d > 0) != (pd > 0)) hits.push_back({m, prev_nu, nu});
      prev[static_cast<std::size_t>(m)] = d;
    }
    prev_nu = nu;
  }
  std::stable_sort(hits.begin(), hits.end(), [](const Hit& x, const Hit& y) { return x.power < y.power; });

  // Stage 2: on each landing bracket, bisect the sign of g'' of phi^M(l+)
  // against S+ at the tip.
  auto g2_at = [&](double nu, int m) {
    try {
      const Scene sc = make_scene(line(nu), so);
      auto tip = tip_at(sc, t_seed);
      if (!tip) return std::numeric_limits<double>::quiet_NaN();
      t_seed = *tip;
      const CurveGerm c = image_germ(sc.params, *sc.l_plus, *tip, m);
      const Jet<kJetOrder> e = sc.s_plus->jet<kJetOrder>(c.x.value());
      return (c.y - compose(e, c.x)).derivative(2);
    } catch (const Error&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  };
  bool found = false;
  std::ostringstream tried;
  for (const Hit& h : hits) {
    double lo = h.nu_lo, hi = h.nu_hi;
    double f_lo = g2_at(lo, h.power), f_hi = g2_at(hi, h.power);
    tried << " power " << h.power << " nu [" << lo << ", " << hi << "] g'' " << f_lo << " " << f_hi << ";";
    if (!std::isfinite(f_lo) || !std::isfinite(f_hi) || (f_lo > 0) == (f_hi > 0)) continue;
    bool ok = true;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double f = g2_at(mid, h.power);
      if (!std::isfinite(f)) {
        ok = false;
        break;
      }
      if ((f > 0) == (f_lo > 0)) {
        lo = mid;
        f_lo = f;
      } else {
        hi = mid;
      }
    }
    if (!ok) continue;
    out.power = h.power;
    out.nu_fold = 0.5 * (lo + hi);
    found = true;
    break;
  }
  if (!found) {
    std::ostringstream msg;
    msg << "no sign change in g'' of the iterated arc at the tip for powers " << lo_power << ".." << hi_power
        << (hits.empty() ? " (its orbit never lands across l- near q+)" : ";") << tried.str();
    fail(ErrorKind::newton_diverged, msg.str());
  }
  {
    std::ostringstream os;
    os << "fold power=" << out.power << " nu=" << out.nu_fold;
    out.log.push_back(os.str());
  }

  // Stage 3: extended-precision addresses of the curve and of S+ at the fold.
  const Params pd = line(out.nu_fold);
  const Scene sc = make_scene(pd, so);
  const auto tip = tip_at(sc, t_seed);
  if (!tip) fail(ErrorKind::newton_diverged, "tip of phi^2(l+) lost at the fold parameter");
  const GraphAnchor ua_d = sc.l_plus->locate(*tip);
  const CurveGerm cd = image_germ(pd, *sc.l_plus, *tip, out.power);
  const GraphAnchor sa_d = sc.s_plus->locate(cd.x.value());
  const BasicParams<Real> p_fold{Real(cycle.a0) + Real(cycle.h_slope) * Real(out.nu_fold), Real(cycle.b0) + Real(out.nu_fold)};
  Real s0;
  {
    const auto fps = fixed_points(p_fold);
    const auto wu = solve_local_manifold(fps.first, ManifoldKind::unstable, opt.precise.degree, 0,
                                         default_validity_tolerance<Real>(), Real(opt.precise.unstable_scale));
    const auto ws = solve_local_manifold(fps.first, ManifoldKind::stable, opt.precise.degree, 0,
                                         default_validity_tolerance<Real>(), Real(opt.precise.stable_scale));
    const auto ua = wu.normalize_address(ua_d.depth, Real(ua_d.s) * Real(sc.l_plus->source().scale) / wu.scale);
    const auto sa = ws.normalize_address(sa_d.depth, Real(sa_d.s) * Real(sc.s_plus->source().scale) / ws.scale);
    out.address.unstable_depth = ua.first + out.power;
    out.address.stable_depth = sa.first;
    out.address.sigma_seed = sa.second;
    s0 = ua.second;
  }
  const GapFamily<Real> family = homoclinic_family(out.address, opt.precise);

  // Stage 4: inflection of the folded arc, then (g, g'') = 0 there in (a, b).
  BasicParams<Real> q = p_fold;
  Real center = detail::derivative_root(family(q), s0, 3);
  auto k0_residual = [&](const BasicParams<Real>& p, Real& c) {
    const BasicGapContext<Real> ctx = family(p);
    c = detail::derivative_root(ctx, c, 3);
    const GapJet<Real> g = gap_jet(ctx, c);
    return std::array<Real, 2>{g.derivative(0), g.derivative(2)};
  };
  bool k0_done = false;
  for (int it = 0; it < opt.k0_max_iter && !k0_done; ++it) {
    const auto f = k0_residual(q, center);
    const Real h = opt.k0_fd_step;
    Real ca = center, cb = center;
    const auto fa = k0_residual({q.a + h, q.b}, ca);
    const auto fb = k0_residual({q.a, q.b + h}, cb);
    std::array<std::array<Real, 2>, 2> j{{{(fa[0] - f[0]) / h, (fb[0] - f[0]) / h}, {(fa[1] - f[1]) / h, (fb[1] - f[1]) / h}}};
    std::array<Real, 2> dx{};
    if (!solve_linear<Real, 2>(j, {Real(-f[0]), Real(-f[1])}, dx))
      fail(ErrorKind::newton_diverged, "singular Jacobian while placing the inflection on S+");
    q.a += dx[0];
    q.b += dx[1];
    std::ostringstream os;
    os << "inflection it=" << it << " g=" << to_double(f[0]) << " g''=" << to_double(f[1]) << " a=" << to_decimal(q.a)
       << " b=" << to_decimal(q.b);
    out.log.push_back(os.str());
    if (!(abs(dx[0]) < Real(0.01) && abs(dx[1]) < Real(0.01)))
      fail(ErrorKind::newton_diverged, "inflection placement step exploded");
    k0_done = abs(dx[0]) + abs(dx[1]) < Real(1e-40);
  }
  if (!k0_done) fail(ErrorKind::newton_diverged, "inflection placement did not converge");
  center = detail::derivative_root(family(q), center, 3);
  out.k0_point = q;
  out.center_t = center;

  // Stage 5: the cubic model g ~ eps dt + (g''''/24) dt^4 near the inflection
  // puts the triple root at dt = -(eps / (8 b1^2))^(1/3), b1^2 = -g''''/24.
  const GapJet<Real> gk = gap_jet(family(q), center);
  const Real b1sq = -gk.derivative(4) / 24;
  if (b1sq == 0) fail(ErrorKind::order_too_high, "quartic coefficient vanishes at the inflection");
  out.model_offset = -cbrt(Real(gk.derivative(1) / (8 * b1sq)));

  CubicOptions<Real> nopt = opt.newton;
  auto user_log = nopt.log;
  nopt.log = [&out, user_log](const NewtonStep<Real>& s) {
    out.log.push_back(detail::step_line("cubic", s));
    if (user_log) user_log(s);
  };
  out.record = find_cubic_tangency(family, Real(center + out.model_offset), q, nopt);
  out.record.kind = TangencyKind::homoclinic;
  out.record.saddle_pair = {Branch::plus, Branch::plus};
  out.record.iterate_depth = out.address.unstable_depth;
  out.record.leaf_depth = out.address.stable_depth;

  const Real da = abs(out.record.params.a - Real(cycle.a0)), db = abs(out.record.params.b - Real(cycle.b0));
  if (!(out.record.params.b > 0) || !(da < Real(opt.trust_radius)) || !(db < Real(opt.trust_radius))) {
    std::ostringstream msg;
    msg << "cubic point (" << to_decimal(out.record.params.a) << ", " << to_decimal(out.record.params.b)
        << ") is outside the trust region of radius " << opt.trust_radius;
    fail(ErrorKind::seed_out_of_neighborhood, msg.str());
  }

  // Stage 6: rebuild everything with other manifold scales and degree and
  // re-measure at the stored point.
  HomoclinicAddress va = out.address;
  va.sigma_seed = out.address.sigma_seed * Real(opt.precise.stable_scale) / Real(opt.verify.stable_scale);
  const GapFamily<Real> vfam = homoclinic_family(va, opt.verify);
  const BasicGapContext<Real> vctx = vfam(out.record.params);
  Real sv = out.record.t_star * Real(opt.precise.unstable_scale) / Real(opt.verify.unstable_scale);
  for (int it = 0; it < 100; ++it) {
    const Germ<kJetOrder, Real> c = vctx.unstable(sv);
    const Real step = (c.x.value() - out.record.location.x) / c.x.coeff(1);
    sv -= step;
    if (abs(step) <= std::numeric_limits<Real>::epsilon() * 64 * (1 + abs(sv))) break;
  }
  CubicOptions<Real> vopt = opt.newton;
  vopt.log = nullptr;
  const CubicMeasurement<Real> vm = measure_cubic(vfam, sv, out.record.params, vopt);
  CubicVerification& v = out.verification;
  v.t = sv;
  v.relative_residual = vm.relative_residual;
  v.relative_g3 = vm.relative_g3;
  v.genericity = vm.genericity;
  v.family = opt.verify;
  v.passed = detail::max_abs(vm.relative_residual) < Real(opt.newton.tol.zero) && vm.relative_g3 > Real(opt.newton.tol.nonzero) &&
             vm.genericity.certified;
  return out;
}

// ---------------------------------------------------- antimonotone ----

template <class R>
struct AntimonotoneTangency {
  R s = 0;
  R t = 0;
  BasicParams<R> params;
  R g2_rel = 0;        ///< g'' T^2 / G
  R velocity_rel = 0;  ///< dg/ds / G
  ContactKind contact = ContactKind::making;
};

template <class R>
struct AntimonotoneLine {
  double angle = 0;
  std::vector<AntimonotoneTangency<R>> tangencies;
  std::vector<std::string> errors;
  bool antimonotone = false;
};

template <class R>
struct AntimonotoneReport {
  double radius = 0;
  int n_directions = 0;
  std::vector<AntimonotoneLine<R>> lines;
  int antimonotone_count = 0;
};

/// Lines through (u, v) = (0, v0) in the unfolding coordinates u = g, v = g'
/// of the cubic point, normalized by the feature scales; v0 sits on the side
/// where two critical points exist. Each line meets the two quadratic
/// tangency curves of the cusp; both are solved and classified.
template <class R>
AntimonotoneReport<R> antimonotone_scan(const GapFamily<R>& family, const BasicTangencyRecord<R>& center, double radius,
                                        int n_directions, const CubicOptions<R>& copt = {}) {
  using std::abs;
  using std::sqrt;
  if (!(radius > 0)) fail(ErrorKind::invalid_input, "antimonotone scan radius must be positive");
  if (n_directions < 1) fail(ErrorKind::invalid_input, "antimonotone scan needs at least one direction");
  if (center.order != 2) fail(ErrorKind::invalid_input, "antimonotone scan needs a cubic tangency");
  CubicOptions<R> mo = copt;
  mo.log = nullptr;
  const CubicMeasurement<R> m = measure_cubic(family, center.t_star, center.params, mo);
  const R T = m.scales.t, G = m.scales.g;
  const R c3 = m.jet.derivative(3) * T * T * T / (6 * G);
  const std::array<std::array<R, 2>, 2> jac{{{m.param_grad[0][0], m.param_grad[1][0]}, {m.param_grad[0][1], m.param_grad[1][1]}}};
  const double v0 = c3 > 0 ? -radius : radius;

  AntimonotoneReport<R> rep;
  rep.radius = radius;
  rep.n_directions = n_directions;
  const double pi = std::acos(-1.0);
  for (int k = 0; k < n_directions; ++k) {
    AntimonotoneLine<R> ln;
    ln.angle = pi * (k + 0.5) / n_directions;
    const double ca = std::cos(ln.angle), sa = std::sin(ln.angle);
    auto params_at = [&](const R& s) {
      const R u = s * R(ca) * G, v = (R(v0) + s * R(sa)) * G / T;
      std::array<R, 2> d{};
      if (!solve_linear<R, 2>(jac, {u, v}, d)) fail(ErrorKind::degenerate_unfolding, "singular unfolding map");
      return BasicParams<R>{center.params.a + d[0], center.params.b + d[1]};
    };
    // Model heights of the two critical points along the line.
    auto model = [&](double s, int sign, double& tau) {
      const double ub = s * ca, vb = v0 + s * sa;
      const double c = to_double(c3);
      if (!(-vb / c > 0)) return std::numeric_limits<double>::quiet_NaN();
      tau = sign * std::sqrt(-vb / (3 * c));
      return c * tau * tau * tau + ub + vb * tau;
    };
    for (int sign : {-1, 1}) {
      const int n = 600;
      const double span = 4 * radius;
      double s_prev = -span, tau = 0, h_prev = model(s_prev, sign, tau);
      std::optional<std::pair<double, double>> seed;
      for (int i = 1; i <= n && !seed; ++i) {
        const double s = -span + 2 * span * i / n;
        const double h = model(s, sign, tau);
        if (std::isfinite(h) && std::isfinite(h_prev) && (h > 0) != (h_prev > 0)) {
          double lo = s_prev, hi = s, flo = h_prev;
          for (int it = 0; it < 80; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double fm = model(mid, sign, tau);
            if ((fm > 0) == (flo > 0)) {
              lo = mid;
              flo = fm;
            } else {
              hi = mid;
            }
          }
          model(0.5 * (lo + hi), sign, tau);
          seed = std::make_pair(0.5 * (lo + hi), tau);
        }
        s_prev = s;
        h_prev = h;
      }
      if (!seed) {
        ln.errors.push_back(std::string("no model tangency on the ") + (sign < 0 ? "left" : "right") + " branch");
        continue;
      }
      try {
        GapPath<R> path = [&](const R& s) { return family(params_at(s)); };
        QuadraticOptions<R> qo;
        qo.tol = copt.tol;
        qo.scales = m.scales;
        qo.fd_step = R(1e-5 * radius);
        const BasicTangencyRecord<R> rec =
            solve_quadratic_tangency(path, R(center.t_star + R(seed->second) * T), R(seed->first), qo);
        AntimonotoneTangency<R> tg;
        tg.s = rec.path_param;
        tg.t = rec.t_star;
        tg.params = rec.params;
        tg.g2_rel = rec.g_derivs[2] * T * T / G;
        tg.velocity_rel = rec.genericity.velocity_diff.y / G;
        tg.contact = classify_contact(tg.g2_rel, tg.velocity_rel);
        ln.tangencies.push_back(tg);
      } catch (const Error& e) {
        ln.errors.push_back(e.what());
      }
    }
    if (ln.tangencies.size() == 2 && abs(ln.tangencies[0].t - ln.tangencies[1].t) < R(1e-3) * T) {
      ln.errors.push_back("both seeds converged to the same tangency");
      ln.tangencies.pop_back();
    }
    ln.antimonotone = ln.tangencies.size() == 2 && ln.tangencies[0].contact != ln.tangencies[1].contact;
    if (ln.antimonotone) ++rep.antimonotone_count;
    rep.lines.push_back(std::move(ln));
  }
  return rep;
}

}  // namespace henon_lab
