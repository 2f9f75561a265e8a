#pragma once

// Invariant manifolds of the saddle fixed points.
//
// The local piece is a Taylor parametrization W solving W(m t) = phi^k(W(t))
// order by order (parameterization method). Global points are addressed as
// (depth, s): depth applications of phi (unstable) or phi^{-1} (stable) to
// W(s). Every sample carries an order-4 jet in s, so derivatives along the
// globalized curve are transported exactly instead of differenced.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iterator>
#include <limits>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "henon_lab/error.hpp"
#include "henon_lab/henon.hpp"
#include "henon_lab/jet.hpp"

namespace henon_lab {

enum class ManifoldKind { stable, unstable };
enum class Side { plus_dir, minus_dir };

inline std::string to_string(ManifoldKind k) { return k == ManifoldKind::stable ? "stable" : "unstable"; }
inline std::string to_string(Side s) { return s == Side::plus_dir ? "plus_dir" : "minus_dir"; }

template <int N = kJetOrder, class R = double>
using Germ = Vec2T<Jet<N, R>>;
using CurveGerm = Germ<kJetOrder>;

struct Rect {
  double x_lo = -5.0;
  double x_hi = 5.0;
  double y_lo = -5.0;
  double y_hi = 5.0;

  bool contains(Point2 p) const { return p.x >= x_lo && p.x <= x_hi && p.y >= y_lo && p.y <= y_hi; }
  bool empty() const { return !(x_hi > x_lo && y_hi > y_lo); }

  friend bool operator==(const Rect&, const Rect&) = default;
};

/// Local invariant curve of a saddle, normalized so |t| <= 1 is certified.
template <class R>
class BasicLocalManifold {
 public:
  BasicFixedPointData<R> fp;
  ManifoldKind kind = ManifoldKind::unstable;
  int iterate = 1;
  R multiplier = 0;  ///< eigenvalue of phi^iterate along the curve
  R scale = 1;       ///< order-1 coefficient = scale * eigenvector
  R validity_residual = 0;
  bool analytic = false;
  BasicSeries<R> x, y;

  const BasicParams<R>& params() const { return fp.params; }
  int degree() const { return x.degree(); }

  Vec2T<R> point(const R& t) const { return {x.evaluate(t), y.evaluate(t)}; }

  template <int N = kJetOrder>
  Germ<N, R> germ(const R& t) const {
    return {x.template jet_at<N>(t), y.template jet_at<N>(t)};
  }

  /// Coefficient k of W as a plane vector.
  Vec2T<R> coefficient(int k) const { return {x[k], y[k]}; }

  /// ||W(m t) - phi^k(W(t))|| (stable) or ||W(t) - phi^k(W(t/m))|| (unstable);
  /// both only evaluate W inside |t| <= |t|.
  R invariance_residual(const R& t) const {
    using std::hypot;
    const Vec2T<R> lhs = kind == ManifoldKind::stable ? point(multiplier * t) : point(t);
    const Vec2T<R> rhs = henon_lab::iterate(params(), kind == ManifoldKind::stable ? point(t) : point(t / multiplier), iterate);
    return hypot(R(lhs.x - rhs.x), R(lhs.y - rhs.y));
  }

  /// Global point: depth map steps (forward for unstable, inverse for stable).
  Vec2T<R> global_point(int depth, const R& s) const {
    Vec2T<R> q = point(s);
    return kind == ManifoldKind::unstable ? henon_lab::iterate(params(), q, depth)
                                          : henon_lab::iterate_inverse(params(), q, depth);
  }

  template <int N = kJetOrder>
  Germ<N, R> global_germ(int depth, const R& s) const {
    Germ<N, R> g = germ<N>(s);
    return kind == ManifoldKind::unstable ? henon_lab::iterate(params(), g, depth)
                                          : henon_lab::iterate_inverse(params(), g, depth);
  }

  /// Same curve point at the smallest depth >= `depth` whose parameter lies in |s| <= 1.
  std::pair<int, R> normalize_address(int depth, R s) const {
    using std::abs;
    for (int guard = 0; abs(s) > 1 && guard < 1000; ++guard) {
      s = kind == ManifoldKind::unstable ? R(s / multiplier) : R(s * multiplier);
      depth += iterate;
    }
    return {depth, s};
  }
};

using LocalManifold = BasicLocalManifold<double>;

namespace detail {

template <class R>
R max_residual(const BasicLocalManifold<R>& m, const R& r) {
  using std::isfinite;
  R worst = 0;
  constexpr int kProbe = 32;
  for (int i = -kProbe; i <= kProbe; ++i) {
    const R res = m.invariance_residual(r * i / kProbe);
    if (!isfinite(res)) return std::numeric_limits<R>::infinity();
    if (res > worst) worst = res;
  }
  return worst;
}

template <class R>
BasicLocalManifold<R> rescaled(const BasicLocalManifold<R>& m, const R& r) {
  BasicLocalManifold<R> out = m;
  R rk = 1;
  for (int k = 0; k <= m.degree(); ++k) {
    out.x[k] = m.x[k] * rk;
    out.y[k] = m.y[k] * rk;
    rk *= r;
  }
  out.scale = m.scale * r;
  return out;
}

template <class R>
R int_power(const R& v, int k) {
  R out = 1;
  for (int i = 0; i < k; ++i) out *= v;
  return out;
}

}  // namespace detail

inline constexpr double kValidityTolerance = 1e-10;
inline constexpr double kResonanceGuard = 1e-12;

/// Residual bound certifying the local piece; tightens with the working precision.
template <class R>
R default_validity_tolerance() {
  if constexpr (std::is_same_v<R, double>) {
    return R(kValidityTolerance);
  } else {
    using std::pow;
    return R(pow(std::numeric_limits<R>::epsilon(), R(0.8)));
  }
}

/// Picks 2 when the relevant eigenvalue is negative, so branch sides are invariant.
template <class R>
int default_iterate(const BasicFixedPointData<R>& fp, ManifoldKind kind) {
  const R& m = kind == ManifoldKind::stable ? fp.lambda : fp.sigma;
  return m < 0 ? 2 : 1;
}

/// With fixed_scale > 0 the normalization is imposed instead of searched, so
/// the parametrization varies smoothly with the parameters; the imposed radius
/// must still meet the tolerance.
template <class R>
BasicLocalManifold<R> solve_local_manifold(const BasicFixedPointData<R>& fp, ManifoldKind kind, int degree = 18,
                                           int iterate = 0, R tolerance = default_validity_tolerance<R>(),
                                           R fixed_scale = R(0)) {
  using std::abs;
  if (degree < 4) fail(ErrorKind::invalid_input, "local parametrization degree must be at least 4");
  if (iterate < 0 || iterate > 2) fail(ErrorKind::invalid_input, "iterate must be 1 or 2");
  if (iterate == 0) iterate = default_iterate(fp, kind);
  const BasicParams<R>& p = fp.params;
  using SeriesR = BasicSeries<R>;

  BasicLocalManifold<R> m;
  m.fp = fp;
  m.kind = kind;
  m.iterate = iterate;
  const R lam = detail::int_power(fp.lambda, iterate);
  const R sig = detail::int_power(fp.sigma, iterate);
  m.multiplier = kind == ManifoldKind::stable ? lam : sig;
  const Vec2T<R> v = kind == ManifoldKind::stable ? fp.eig_vec_s : fp.eig_vec_u;

  if (kind == ManifoldKind::stable && p.b == 0) {
    // phi collapses the horizontal line through the fixed point onto it.
    m.analytic = true;
    m.x = SeriesR(degree, fp.location.x);
    m.y = SeriesR(degree, fp.location.y);
    m.x[1] = 1;
    const R kAnalyticScale = 5;
    return detail::rescaled(m, kAnalyticScale);
  }

  m.x = SeriesR(degree, fp.location.x);
  m.y = SeriesR(degree, fp.location.y);
  m.x[1] = v.x;
  m.y[1] = v.y;
  const BasicMatrix2<R> a = jacobian_power(p, fp.location, iterate);
  for (int k = 2; k <= degree; ++k) {
    // Coefficient k of phi^iterate(W_{<k}); the linear part of W_k is A W_k.
    const Vec2T<SeriesR> image = henon_lab::iterate(p, Vec2T<SeriesR>{m.x, m.y}, iterate);
    const R rx = image.x[k];
    const R ry = image.y[k];
    const R mk = detail::int_power(m.multiplier, k);
    if (abs(mk - lam) < kResonanceGuard || abs(mk - sig) < kResonanceGuard) {
      std::ostringstream msg;
      msg << "multiplier power " << k << " resonates with an eigenvalue";
      fail(ErrorKind::resonance_obstruction, msg.str());
    }
    // (mk I - A) W_k = R_k
    const R m00 = mk - a(0, 0), m01 = -a(0, 1), m10 = -a(1, 0), m11 = mk - a(1, 1);
    const R det = m00 * m11 - m01 * m10;
    m.x[k] = (m11 * rx - m01 * ry) / det;
    m.y[k] = (m00 * ry - m10 * rx) / det;
  }

  if (fixed_scale > 0) {
    BasicLocalManifold<R> out = detail::rescaled(m, fixed_scale);
    out.validity_residual = detail::max_residual(out, R(1));
    if (!(out.validity_residual < tolerance))
      fail(ErrorKind::out_of_domain, "imposed local scale exceeds the certified validity radius");
    return out;
  }

  // Largest radius with certified residual, by doubling then bisection.
  R lo = 0;
  R hi = R(1e-3);
  while (hi < 1e3 && detail::max_residual(m, hi) < tolerance) {
    lo = hi;
    hi *= 2;
  }
  if (lo == 0) {
    // Even tiny radii fail; bisect downward.
    while (hi > 1e-12 && detail::max_residual(m, hi) >= tolerance) hi /= 2;
    if (hi <= 1e-12) fail(ErrorKind::invalid_input, "local parametrization has no certified validity interval");
    lo = hi;
    hi *= 2;
  }
  for (int it = 0; it < 40 && hi - lo > lo * 1e-6; ++it) {
    const R mid = (lo + hi) / 2;
    if (detail::max_residual(m, mid) < tolerance)
      lo = mid;
    else
      hi = mid;
  }
  BasicLocalManifold<R> out = detail::rescaled(m, lo);
  out.validity_residual = detail::max_residual(out, R(1));
  // Rounding in the rescaled coefficients can lift the residual just past the
  // tolerance at the edge; back off until the returned curve is certified.
  for (int it = 0; it < 50 && !(out.validity_residual < tolerance); ++it) {
    lo *= R(0.98);
    out = detail::rescaled(m, lo);
    out.validity_residual = detail::max_residual(out, R(1));
  }
  if (!(out.validity_residual < tolerance))
    fail(ErrorKind::invalid_input, "local parametrization has no certified validity interval");
  return out;
}

struct BranchSample {
  double arclength = 0.0;
  int depth = 0;
  double s = 0.0;
  Point2 point;
  CurveGerm germ;
};

struct ManifoldBranch {
  std::shared_ptr<const LocalManifold> local;
  Side side = Side::plus_dir;
  std::vector<BranchSample> samples;
  bool grown = false;

  const FixedPointData& fp() const { return local->fp; }
  ManifoldKind kind() const { return local->kind; }
  const Params& params() const { return local->params(); }
  int iterate() const { return local->iterate; }

  std::vector<Point2> local_coeffs() const {
    std::vector<Point2> c;
    for (int k = 0; k <= local->degree(); ++k) c.push_back(local->coefficient(k));
    return c;
  }
};

namespace detail {
inline BranchSample make_sample(const LocalManifold& m, int depth, double s) {
  BranchSample out;
  out.depth = depth;
  out.s = s;
  out.germ = m.global_germ(depth, s);
  out.point = {out.germ.x.value(), out.germ.y.value()};
  return out;
}
}  // namespace detail

/// Local part only: samples across the certified interval |t| <= 1.
inline ManifoldBranch local_parametrization(const FixedPointData& fp, ManifoldKind kind, int degree = 18, int iterate = 0,
                                            Side side = Side::plus_dir) {
  ManifoldBranch br;
  br.local = std::make_shared<const LocalManifold>(solve_local_manifold(fp, kind, degree, iterate));
  br.side = side;
  constexpr int kLocalSamples = 200;
  for (int i = 0; i <= kLocalSamples; ++i) {
    BranchSample smp = detail::make_sample(*br.local, 0, -1.0 + 2.0 * i / kLocalSamples);
    smp.arclength = br.samples.empty() ? 0.0 : br.samples.back().arclength + distance(br.samples.back().point, smp.point);
    br.samples.push_back(smp);
  }
  return br;
}

struct GrowOptions {
  double angle_cap = 0.05;
  double len_cap = 1e-2;
  double blow_up = 1e6;
  int max_domains = 80;
  int initial_grid = 8;
};

inline double tangent_angle(const CurveGerm& a, const CurveGerm& b) {
  const double ax = a.x.coeff(1), ay = a.y.coeff(1), bx = b.x.coeff(1), by = b.y.coeff(1);
  return std::abs(std::atan2(ax * by - ay * bx, ax * bx + ay * by));
}

/// Globalizes the local curve on one side by fundamental domains.
inline ManifoldBranch grow_branch(const ManifoldBranch& branch, double max_arclength, const Rect& bounds,
                                  const GrowOptions& opt = {}) {
  const LocalManifold& m = *branch.local;
  if (m.kind == ManifoldKind::stable && m.params().b == 0.0)
    fail(ErrorKind::degenerate_parameter, "stable manifold growth needs the inverse map (b = 0)");
  if (!(max_arclength > 0.0) || bounds.empty()) fail(ErrorKind::invalid_input, "grow_branch needs positive length and bounds");

  ManifoldBranch out;
  out.local = branch.local;
  out.side = branch.side;
  out.grown = true;
  const double sign = branch.side == Side::plus_dir ? 1.0 : -1.0;
  const double rho = m.kind == ManifoldKind::unstable ? 1.0 / std::abs(m.multiplier) : std::abs(m.multiplier);

  BranchSample current = detail::make_sample(m, 0, 0.0);
  out.samples.push_back(current);

  auto needs_split = [&](const BranchSample& a, const BranchSample& b) {
    if (std::abs(b.s - a.s) <= 1e-14 * std::max(std::abs(a.s), std::abs(b.s))) return false;
    if (!std::isfinite(b.point.x) || !std::isfinite(b.point.y)) return true;
    if (distance(a.point, b.point) > opt.len_cap) return true;
    return tangent_angle(a.germ, b.germ) > opt.angle_cap;
  };
  // Returns false once the branch should stop.
  auto emit = [&](BranchSample smp) {
    if (!std::isfinite(smp.point.x) || !std::isfinite(smp.point.y) || norm(smp.point) > opt.blow_up)
      fail(ErrorKind::blow_up, "manifold sample exceeded the blow-up magnitude");
    if (!bounds.contains(smp.point)) return false;
    smp.arclength = current.arclength + distance(current.point, smp.point);
    if (smp.arclength > max_arclength) return false;
    out.samples.push_back(smp);
    current = smp;
    return true;
  };

  for (int dom = 0; dom <= opt.max_domains; ++dom) {
    const int depth = dom * m.iterate;
    // With a negative multiplier the fundamental domains alternate sides.
    const double dsign = (m.multiplier < 0.0 && dom % 2 == 1) ? -sign : sign;
    std::vector<double> grid;
    if (dom == 0) {
      for (int i = 1; i <= 2 * opt.initial_grid; ++i) grid.push_back(dsign * double(i) / (2 * opt.initial_grid));
    } else {
      for (int i = 1; i <= opt.initial_grid; ++i) grid.push_back(dsign * std::pow(rho, 1.0 - double(i) / opt.initial_grid));
      // The first point of the domain coincides with the last emitted one.
      current.depth = depth;
      current.s = dsign * rho;
      current.germ = m.global_germ(depth, current.s);
    }
    const double start_len = current.arclength;
    for (double target : grid) {
      std::vector<BranchSample> stack{detail::make_sample(m, depth, target)};
      while (!stack.empty()) {
        const BranchSample& cand = stack.back();
        if (needs_split(current, cand)) {
          const double mid = dom == 0 ? 0.5 * (current.s + cand.s) : std::copysign(std::sqrt(current.s * cand.s), dsign);
          stack.push_back(detail::make_sample(m, depth, mid));
          continue;
        }
        BranchSample next = cand;
        stack.pop_back();
        if (!emit(next)) return out;
      }
    }
    if (dom > 0 && current.arclength - start_len < 1e-14) break;  // accumulated onto an endpoint
  }
  return out;
}

/// Which coordinate serves as the graph variable.
enum class GraphAxis { x, y };

struct GraphAnchor {
  double coord = 0.0;
  int depth = 0;
  double s = 0.0;
};

/// A manifold segment written as a graph over one axis: y = eta(x) (axis x)
/// or x = xi(y) (axis y). Evaluation lands exactly on the invariant curve by
/// a Newton solve in the local parameter and converts the transported jet to
/// the graph variable by series reversion.
class HoldingFunction {
 public:
  HoldingFunction() = default;
  HoldingFunction(std::shared_ptr<const LocalManifold> local, GraphAxis axis, double lo, double hi,
                  std::vector<GraphAnchor> anchors)
      : local_(std::move(local)), axis_(axis), lo_(lo), hi_(hi), anchors_(std::move(anchors)) {
    if (anchors_.empty()) fail(ErrorKind::invalid_input, "holding function needs at least one anchor");
    std::sort(anchors_.begin(), anchors_.end(), [](const GraphAnchor& a, const GraphAnchor& b) { return a.coord < b.coord; });
  }

  /// Preimage leaf: the points (x, Y) with phi(x, Y) on `parent` (an x-graph
  /// of a stable curve). Anchors hold (x, Y) seeds in the `s` slot.
  HoldingFunction(std::shared_ptr<const HoldingFunction> parent, const Params& params, double lo, double hi,
                  std::vector<GraphAnchor> anchors)
      : local_(parent->local_), axis_(GraphAxis::x), lo_(lo), hi_(hi), anchors_(std::move(anchors)),
        parent_(std::move(parent)), params_(params) {
    if (anchors_.empty()) fail(ErrorKind::invalid_input, "holding function needs at least one anchor");
    if (params_.b == 0.0) fail(ErrorKind::degenerate_parameter, "preimage leaves need b != 0");
    std::sort(anchors_.begin(), anchors_.end(), [](const GraphAnchor& a, const GraphAnchor& b) { return a.coord < b.coord; });
  }

  double x_lo() const { return lo_; }
  double x_hi() const { return hi_; }
  GraphAxis axis() const { return axis_; }
  const LocalManifold& source() const { return *local_; }
  const std::shared_ptr<const LocalManifold>& source_ptr() const { return local_; }
  const std::vector<GraphAnchor>& anchors() const { return anchors_; }
  bool contains(double c) const { return c >= lo_ && c <= hi_; }

  /// Normalized Taylor coefficients of the graph function at c.
  template <int N = kJetOrder>
  Jet<N> jet(double c) const {
    if (!std::isfinite(c) || c < lo_ - margin() || c > hi_ + margin())
      fail(ErrorKind::out_of_domain, "holding function evaluated outside its interval");
    if (parent_) return preimage_jet<N>(c);
    const GraphAnchor& a = nearest(c);
    const double s = solve(a, c);
    const Germ<N> g = local_->global_germ<N>(a.depth, s);
    const Jet<N>& u = axis_ == GraphAxis::x ? g.x : g.y;
    const Jet<N>& w = axis_ == GraphAxis::x ? g.y : g.x;
    return graph_over(u, w).recenter(c - u.value());
  }

  double value(double c) const { return jet<kJetOrder>(c).value(); }
  double derivative(double c, int k) const { return jet<kJetOrder>(c).derivative(k); }
  double operator()(double c) const { return value(c); }

  /// Curve point at graph coordinate c.
  Point2 point(double c) const {
    const double v = value(c);
    return axis_ == GraphAxis::x ? Point2{c, v} : Point2{v, c};
  }

  /// Local parameter (at the anchor's depth) of the curve point with coordinate c.
  GraphAnchor locate(double c) const {
    if (parent_) {
      const GraphAnchor up = parent_->locate(solve_preimage(c));
      return {c, up.depth + 1, up.s};
    }
    const GraphAnchor& a = nearest(c);
    return {c, a.depth, solve(a, c)};
  }

  /// Number of preimage steps above the directly parametrized curve.
  int leaf_depth() const { return parent_ ? parent_->leaf_depth() + 1 : 0; }
  const std::shared_ptr<const HoldingFunction>& parent() const { return parent_; }

 private:
  double margin() const { return 1e-9 * std::max(1.0, hi_ - lo_); }

  const GraphAnchor& nearest(double c) const {
    auto it = std::lower_bound(anchors_.begin(), anchors_.end(), c, [](const GraphAnchor& a, double v) { return a.coord < v; });
    if (it == anchors_.end()) return anchors_.back();
    if (it == anchors_.begin()) return *it;
    auto prev = std::prev(it);
    return (c - prev->coord < it->coord - c) ? *prev : *it;
  }

  double solve(const GraphAnchor& a, double c) const {
    double s = a.s;
    double best_s = s, best_err = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 60; ++it) {
      const Germ<1> g = local_->global_germ<1>(a.depth, s);
      const Jet<1>& u = axis_ == GraphAxis::x ? g.x : g.y;
      const double err = u.value() - c;
      if (std::abs(err) < best_err) {
        best_err = std::abs(err);
        best_s = s;
      }
      if (u.coeff(1) == 0.0 || !std::isfinite(u.coeff(1))) break;
      const double step = err / u.coeff(1);
      s -= step;
      if (std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(s))) break;
    }
    if (!(best_err < 1e-6 * std::max(1.0, hi_ - lo_)))
      fail(ErrorKind::out_of_domain, "holding function could not reach the requested coordinate");
    return best_s;
  }

  // Y with x(Y) = (a + Y^2 - parent(Y)) / b equal to c, seeded by interpolation.
  double solve_preimage(double c) const {
    auto it = std::lower_bound(anchors_.begin(), anchors_.end(), c, [](const GraphAnchor& a, double v) { return a.coord < v; });
    double y;
    if (it == anchors_.begin()) {
      y = it->s;
    } else if (it == anchors_.end()) {
      y = anchors_.back().s;
    } else {
      const auto prev = std::prev(it);
      const double w = (c - prev->coord) / (it->coord - prev->coord);
      y = prev->s + w * (it->s - prev->s);
    }
    double best_y = y, best_err = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < 40; ++iter) {
      const Jet<1> e = parent_->jet<1>(y);
      const double x = (params_.a + y * y - e.value()) / params_.b;
      const double dx = (2.0 * y - e.coeff(1)) / params_.b;
      const double err = x - c;
      if (std::abs(err) < best_err) {
        best_err = std::abs(err);
        best_y = y;
      }
      if (dx == 0.0 || !std::isfinite(dx)) break;
      const double step = err / dx;
      y -= step;
      if (std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(y))) break;
    }
    if (!(best_err < 1e-6 * std::max(1.0, hi_ - lo_)))
      fail(ErrorKind::out_of_domain, "preimage leaf could not reach the requested coordinate");
    return best_y;
  }

  template <int N>
  Jet<N> preimage_jet(double c) const {
    const double y0 = solve_preimage(c);
    const Jet<N> y = Jet<N>::variable(y0);
    const Jet<N> up = compose(parent_->jet<N>(y0), y);
    const Jet<N> x = (params_.a + y * y - up) / params_.b;
    return graph_over(x, y).recenter(c - x.value());
  }

  std::shared_ptr<const LocalManifold> local_;
  GraphAxis axis_ = GraphAxis::x;
  double lo_ = 0.0, hi_ = 0.0;
  std::vector<GraphAnchor> anchors_;
  std::shared_ptr<const HoldingFunction> parent_;
  Params params_;
};

/// x-graph of the local curve itself over [lo, hi] (inside its validity
/// interval), anchored on a uniform grid.
inline HoldingFunction local_graph(std::shared_ptr<const LocalManifold> local, double lo, double hi, int n_anchors = 50) {
  if (!(hi > lo) || n_anchors < 1) fail(ErrorKind::invalid_input, "local graph needs lo < hi and anchors");
  std::vector<GraphAnchor> anchors;
  double s = 0.0;
  for (int i = 0; i <= n_anchors; ++i) {
    const double x0 = lo + (hi - lo) * i / n_anchors;
    for (int iter = 0; iter < 60; ++iter) {
      const Germ<1> g = local->germ<1>(s);
      if (g.x.coeff(1) == 0.0) fail(ErrorKind::not_a_graph, "local curve is vertical");
      const double step = (g.x.value() - x0) / g.x.coeff(1);
      s -= step;
      if (std::abs(step) < 1e-17 * std::max(1.0, std::abs(s))) break;
    }
    if (std::abs(s) > 1.0 || std::abs(local->point(s).x - x0) > 1e-9)
      fail(ErrorKind::out_of_domain, "local curve does not cover the requested interval");
    anchors.push_back({x0, 0, s});
  }
  return HoldingFunction(std::move(local), GraphAxis::x, lo, hi, std::move(anchors));
}

/// Preimage leaf over [lo, hi]: the branch of phi^{-1}(parent) whose points
/// have height near y_seed. The parent must be defined at those heights.
inline HoldingFunction preimage_leaf(std::shared_ptr<const HoldingFunction> parent, const Params& params, double lo, double hi,
                                     double y_seed, int n_anchors = 50) {
  if (!(hi > lo) || n_anchors < 1) fail(ErrorKind::invalid_input, "preimage leaf needs lo < hi and anchors");
  if (params.b == 0.0) fail(ErrorKind::degenerate_parameter, "preimage leaves need b != 0");
  std::vector<GraphAnchor> anchors;
  double y = y_seed;
  for (int i = 0; i <= n_anchors; ++i) {
    const double x0 = lo + (hi - lo) * i / n_anchors;
    bool ok = false;
    // a - b x0 + Y^2 = parent(Y)
    for (int iter = 0; iter < 60; ++iter) {
      if (!parent->contains(y)) break;
      const Jet<1> e = parent->jet<1>(y);
      const double f = params.a - params.b * x0 + y * y - e.value();
      const double df = 2.0 * y - e.coeff(1);
      if (df == 0.0) break;
      const double step = f / df;
      y -= step;
      if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(y))) {
        ok = parent->contains(y);
        break;
      }
    }
    if (!ok) fail(ErrorKind::out_of_domain, "preimage leaf seed did not converge");
    anchors.push_back({x0, 0, y});
  }
  return HoldingFunction(std::move(parent), params, lo, hi, std::move(anchors));
}

inline constexpr double kDefaultSlopeCap = 10.0;

namespace detail {
inline double axis_coord(Point2 p, GraphAxis axis) { return axis == GraphAxis::x ? p.x : p.y; }
}  // namespace detail

/// Graph over `axis` on [lo, hi] from the first run of samples (at or after
/// `start`) whose graph coordinate lies inside the interval.
inline HoldingFunction graph_from_samples(const std::vector<BranchSample>& samples, std::shared_ptr<const LocalManifold> local,
                                          GraphAxis axis, double lo, double hi, double slope_cap = kDefaultSlopeCap,
                                          std::size_t start = 0) {
  if (!(hi > lo)) fail(ErrorKind::invalid_input, "graph interval needs lo < hi");
  const std::size_t n = samples.size();
  auto coord = [&](std::size_t i) { return detail::axis_coord(samples[i].point, axis); };
  auto inside = [&](std::size_t i) { return coord(i) >= lo && coord(i) <= hi; };
  std::size_t first = start;
  while (first < n && !inside(first)) ++first;
  if (first == n) fail(ErrorKind::out_of_domain, "branch does not enter the requested interval");
  std::size_t last = first;
  while (last + 1 < n && inside(last + 1)) ++last;
  // Neighbors just outside the interval anchor the end points.
  const std::size_t lo_i = first > start ? first - 1 : first;
  const std::size_t hi_i = last + 1 < n ? last + 1 : last;

  std::vector<double> folds;
  for (std::size_t i = lo_i + 1; i + 1 <= hi_i; ++i) {
    const double d0 = coord(i) - coord(i - 1);
    const double d1 = coord(i + 1) - coord(i);
    if (d0 * d1 <= 0.0) folds.push_back(coord(i));
  }
  if (!folds.empty()) {
    std::ostringstream msg;
    msg << "segment folds over the graph axis at";
    for (double f : folds) msg << ' ' << f;
    fail(ErrorKind::not_a_graph, msg.str());
  }
  const double cover_lo = std::min(coord(lo_i), coord(hi_i));
  const double cover_hi = std::max(coord(lo_i), coord(hi_i));
  const double tol = 1e-9 * (hi - lo);
  if (cover_lo > lo + tol || cover_hi < hi - tol) fail(ErrorKind::out_of_domain, "branch does not cover the requested interval");

  std::vector<GraphAnchor> anchors;
  for (std::size_t i = lo_i; i <= hi_i; ++i) {
    const BranchSample& smp = samples[i];
    const double du = axis == GraphAxis::x ? smp.germ.x.coeff(1) : smp.germ.y.coeff(1);
    const double dw = axis == GraphAxis::x ? smp.germ.y.coeff(1) : smp.germ.x.coeff(1);
    if (du == 0.0 || std::abs(dw) >= slope_cap * std::abs(du)) {
      std::ostringstream msg;
      msg << "slope exceeds the cap near " << (axis == GraphAxis::x ? "x" : "y") << " = " << coord(i);
      fail(ErrorKind::not_a_graph, msg.str());
    }
    anchors.push_back({coord(i), smp.depth, smp.s});
  }
  return HoldingFunction(std::move(local), axis, lo, hi, std::move(anchors));
}

/// Graph y = eta(x) over [x_lo, x_hi] from the first run of samples inside the interval.
inline HoldingFunction holding_function(const std::vector<BranchSample>& samples, std::shared_ptr<const LocalManifold> local,
                                        double x_lo, double x_hi, double slope_cap = kDefaultSlopeCap) {
  return graph_from_samples(samples, std::move(local), GraphAxis::x, x_lo, x_hi, slope_cap);
}

inline HoldingFunction holding_function(const ManifoldBranch& branch, double x_lo, double x_hi,
                                        double slope_cap = kDefaultSlopeCap) {
  return holding_function(branch.samples, branch.local, x_lo, x_hi, slope_cap);
}

/// Both sides of the same manifold joined through the fixed point.
inline HoldingFunction holding_function(const ManifoldBranch& minus_side, const ManifoldBranch& plus_side, double x_lo,
                                        double x_hi, double slope_cap = kDefaultSlopeCap) {
  if (minus_side.local != plus_side.local) fail(ErrorKind::invalid_input, "branches must share the local parametrization");
  std::vector<BranchSample> joined(minus_side.samples.rbegin(), minus_side.samples.rend());
  if (!joined.empty() && !plus_side.samples.empty()) joined.pop_back();
  joined.insert(joined.end(), plus_side.samples.begin(), plus_side.samples.end());
  return holding_function(joined, plus_side.local, x_lo, x_hi, slope_cap);
}

/// Distance from q to the true curve near the closest sample (Newton on the
/// squared distance in the sample's local parameter).
inline double distance_to_branch(const ManifoldBranch& branch, Point2 q) {
  if (branch.samples.empty()) return std::numeric_limits<double>::infinity();
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < branch.samples.size(); ++i) {
    const double d = distance(branch.samples[i].point, q);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  // Try the closest sample and its neighbors, since the foot may lie in an adjacent domain.
  double result = best_d;
  for (std::size_t i = best > 0 ? best - 1 : 0; i <= std::min(best + 1, branch.samples.size() - 1); ++i) {
    const BranchSample& smp = branch.samples[i];
    double s = smp.s;
    for (int it = 0; it < 30; ++it) {
      const Germ<2> g = branch.local->global_germ<2>(smp.depth, s);
      const double ex = g.x.value() - q.x, ey = g.y.value() - q.y;
      const double d1 = ex * g.x.coeff(1) + ey * g.y.coeff(1);
      const double d2 = g.x.coeff(1) * g.x.coeff(1) + g.y.coeff(1) * g.y.coeff(1) +
                        2.0 * (ex * g.x.coeff(2) + ey * g.y.coeff(2));
      if (!(d2 > 0.0)) break;
      const double step = d1 / d2;
      s -= step;
      if (std::abs(step) < 1e-17 * std::max(1.0, std::abs(s))) break;
    }
    result = std::min(result, distance(branch.local->global_point(smp.depth, s), q));
  }
  return result;
}

/// CSV with arclength, point and the first three jet derivatives in s.
inline void write_branch_csv(std::ostream& os, const ManifoldBranch& branch) {
  os << "arclength,x,y,dx_dt,dy_dt,d2x_dt2,d2y_dt2,d3x_dt3,d3y_dt3\n";
  os.precision(17);
  for (const BranchSample& smp : branch.samples) {
    os << smp.arclength << ',' << smp.point.x << ',' << smp.point.y;
    for (int k = 1; k <= 3; ++k) os << ',' << smp.germ.x.derivative(k) << ',' << smp.germ.y.derivative(k);
    os << '\n';
  }
}

}  // namespace henon_lab
