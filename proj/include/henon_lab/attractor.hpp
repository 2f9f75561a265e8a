#pragma once

// Orbit diagnostics: the cubic model x -> -x^3 + a x, Lyapunov exponents of
// the map by tangent transport and by two-orbit divergence, and sampled return
// relations (x_k, x_{k+m}) along an attractor orbit.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "henon_lab/error.hpp"
#include "henon_lab/henon.hpp"
#include "henon_lab/manifold.hpp"
#include "henon_lab/numeric.hpp"

namespace henon_lab {

inline constexpr double kEscapeRadius = 10.0;

/// (3 sqrt(3) / 2, 3), the parameter window of the cubic model.
inline constexpr double kCubicWindowLo = 2.598076211353316;
inline constexpr double kCubicWindowHi = 3.0;

struct CubicMapReport {
  double a = 0;
  std::array<double, 3> fixed_points{};  ///< 0, +sqrt(a-1), -sqrt(a-1)
  std::array<double, 3> multipliers{};   ///< -3x^2 + a at each fixed point
  double lyapunov = 0;
  bool orbit_escaped = false;
  bool in_window = false;
  long n_iter = 0;
  long transient = 0;
  double x0 = 0;
};

inline double cubic_model(double a, double x) { return -x * x * x + a * x; }
inline double cubic_model_derivative(double a, double x) { return -3.0 * x * x + a; }

/// Birkhoff average of log|f'| along the orbit of x0 after a transient.
/// Escape past |x| > 10 throws OrbitEscaped unless throw_on_escape is false,
/// in which case the report carries orbit_escaped and a NaN exponent.
inline CubicMapReport cubic_map_analysis(double a, long n_iter = 1'000'000, long transient = 10'000, double x0 = 0.3,
                                         bool throw_on_escape = true) {
  if (!(a > 1.0 && a <= 3.0)) fail(ErrorKind::invalid_input, "cubic model needs a in (1, 3]");
  if (n_iter <= 0 || transient < 0) fail(ErrorKind::invalid_input, "iteration counts must be positive");
  CubicMapReport r;
  r.a = a;
  r.n_iter = n_iter;
  r.transient = transient;
  r.x0 = x0;
  const double s = std::sqrt(a - 1.0);
  r.fixed_points = {0.0, s, -s};
  for (int i = 0; i < 3; ++i) r.multipliers[i] = cubic_model_derivative(a, r.fixed_points[i]);
  r.in_window = a > kCubicWindowLo && a < kCubicWindowHi;

  double x = x0, sum = 0.0;
  for (long k = 0; k < transient + n_iter; ++k) {
    if (k >= transient) sum += std::log(std::abs(cubic_model_derivative(a, x)));
    x = cubic_model(a, x);
    if (!(std::abs(x) <= kEscapeRadius)) {
      if (throw_on_escape) fail(ErrorKind::orbit_escaped, "cubic model orbit left |x| <= 10");
      r.orbit_escaped = true;
      r.lyapunov = std::numeric_limits<double>::quiet_NaN();
      return r;
    }
  }
  r.lyapunov = sum / static_cast<double>(n_iter);
  return r;
}

struct OrbitOptions {
  int map_power = 1;                   ///< exponents are per application of phi^map_power
  std::optional<Point2> seed;          ///< default: offset from p+ along its unstable direction
  double seed_offset = 1e-3;
  double divergence_delta = 1e-8;      ///< separation of the shadow orbit
  int growth_checkpoints = 200;
  double escape_radius = kEscapeRadius;
};

struct OrbitStats {
  Params params;
  double lyapunov_max = 0;         ///< tangent transport
  double lyapunov_min = 0;         ///< second exponent from the QR recursion
  double lyapunov_sum = 0;
  double divergence_max = 0;       ///< two-orbit estimate
  double growth_constant_c = 0;    ///< fitted rate of log |D phi^n v0| when positive, else 0
  double growth_fit_rate = 0;      ///< the raw fitted rate
  Rect bbox{0, 0, 0, 0};
  long n_iter = 0;
  long transient = 0;
  int map_power = 1;
  Point2 seed;
  bool escaped = false;
};

namespace detail {

inline bool escaped_point(Point2 p, double radius) { return !(std::hypot(p.x, p.y) <= radius); }

inline Point2 power_map(const Params& p, Point2 q, int m) { return iterate(p, q, m); }

inline std::vector<Point2> orbit_seeds(const Params& p, double offset) {
  std::vector<Point2> seeds;
  for (Branch w : {Branch::plus, Branch::minus}) {
    try {
      const FixedPointData fp = eigen_data(p, w);
      const Vector2 u = (1.0 / norm(fp.eig_vec_u)) * fp.eig_vec_u;
      seeds.push_back(fp.location + offset * u);
      seeds.push_back(fp.location - offset * u);
    } catch (const Error&) {
      try {
        const double y = fixed_point_coordinate(p, w);
        seeds.push_back({y + offset, y});
      } catch (const Error&) {
      }
    }
  }
  seeds.push_back({0.0, 0.0});
  return seeds;
}

/// Runs the transient from seed; returns the landing point or nothing on escape.
inline std::optional<Point2> settle(const Params& p, Point2 q, long transient, int m, double radius) {
  for (long k = 0; k < transient; ++k) {
    q = power_map(p, q, m);
    if (escaped_point(q, radius)) return std::nullopt;
  }
  return q;
}

}  // namespace detail

/// Lyapunov exponents along an orbit of phi^map_power. Two independent
/// estimators: QR transport of a tangent frame, and the divergence of a
/// shadow orbit renormalized to a fixed separation each step.
inline OrbitStats henon_lyapunov(const Params& p, long n_iter, long transient, const OrbitOptions& opt = {}) {
  if (n_iter <= 0 || transient < 0) fail(ErrorKind::invalid_input, "iteration counts must be positive");
  if (opt.map_power < 1) fail(ErrorKind::invalid_input, "map power must be at least 1");
  const int m = opt.map_power;
  OrbitStats st;
  st.params = p;
  st.n_iter = n_iter;
  st.transient = transient;
  st.map_power = m;

  std::optional<Point2> start;
  const std::vector<Point2> seeds = opt.seed ? std::vector<Point2>{*opt.seed} : detail::orbit_seeds(p, opt.seed_offset);
  for (Point2 s : seeds) {
    start = detail::settle(p, s, transient, m, opt.escape_radius);
    if (start) {
      st.seed = s;
      break;
    }
  }
  if (!start) fail(ErrorKind::orbit_escaped, "every seed left the escape radius during the transient");

  Point2 q = *start;
  // Frame columns e1, e2 start tilted so neither lies in the kernel at b = 0;
  // the shadow orbit keeps separation delta.
  const double c0 = std::cos(0.3), s0 = std::sin(0.3);
  double e1x = c0, e1y = s0, e2x = -s0, e2y = c0;
  double log1 = 0, log2 = 0, div = 0;
  const double delta = opt.divergence_delta;
  Point2 shadow{q.x + delta * c0, q.y + delta * s0};
  const long every = std::max<long>(1, n_iter / std::max(1, opt.growth_checkpoints));
  std::vector<double> ns, logs;
  st.bbox = {q.x, q.x, q.y, q.y};

  for (long k = 0; k < n_iter; ++k) {
    for (int j = 0; j < m; ++j) {
      const double d = 2.0 * q.y;
      const double t1x = e1y, t1y = -p.b * e1x + d * e1y;
      const double t2x = e2y, t2y = -p.b * e2x + d * e2y;
      e1x = t1x, e1y = t1y, e2x = t2x, e2y = t2y;
      q = apply(p, q);
    }
    const double r11 = std::hypot(e1x, e1y);
    e1x /= r11, e1y /= r11;
    const double r12 = e1x * e2x + e1y * e2y;
    e2x -= r12 * e1x, e2y -= r12 * e1y;
    const double r22 = std::hypot(e2x, e2y);
    log1 += std::log(r11);
    log2 += std::log(r22);
    if (r22 > 0) e2x /= r22, e2y /= r22;
    else e2x = -e1y, e2y = e1x;

    shadow = detail::power_map(p, shadow, m);
    const double sep = std::hypot(shadow.x - q.x, shadow.y - q.y);
    div += std::log(sep / delta);
    if (sep > 0) shadow = {q.x + (shadow.x - q.x) * delta / sep, q.y + (shadow.y - q.y) * delta / sep};
    else shadow = {q.x + delta * e1x, q.y + delta * e1y};

    if (detail::escaped_point(q, opt.escape_radius)) {
      st.escaped = true;
      fail(ErrorKind::orbit_escaped, "orbit left the escape radius");
    }
    st.bbox.x_lo = std::min(st.bbox.x_lo, q.x);
    st.bbox.x_hi = std::max(st.bbox.x_hi, q.x);
    st.bbox.y_lo = std::min(st.bbox.y_lo, q.y);
    st.bbox.y_hi = std::max(st.bbox.y_hi, q.y);
    if ((k + 1) % every == 0) {
      ns.push_back(static_cast<double>(k + 1));
      logs.push_back(log1);
    }
  }
  const double n = static_cast<double>(n_iter);
  st.lyapunov_max = log1 / n;
  st.lyapunov_min = log2 / n;
  st.lyapunov_sum = st.lyapunov_max + st.lyapunov_min;
  st.divergence_max = div / n;
  if (ns.size() >= 2) {
    const MonomialFit<double> fit = fit_monomials(ns, logs, {0, 1});
    st.growth_fit_rate = fit.coeffs[1];
  } else {
    st.growth_fit_rate = st.lyapunov_max;
  }
  st.growth_constant_c = st.growth_fit_rate > 0 ? st.growth_fit_rate : 0.0;
  return st;
}

enum class ReturnAxis { x, y, dominant };

inline std::string to_string(ReturnAxis a) {
  switch (a) {
    case ReturnAxis::x: return "x";
    case ReturnAxis::y: return "y";
    case ReturnAxis::dominant: return "dominant";
  }
  return "?";
}

struct ReturnMapOptions {
  int m = 1;
  ReturnAxis axis = ReturnAxis::dominant;
  int bins = 100;
  std::optional<Point2> seed;
  double seed_offset = 1e-3;
  double escape_radius = kEscapeRadius;
};

struct ReturnMapBin {
  double center = 0;
  double mean = 0;
  long count = 0;
};

struct ReturnMapData {
  Params params;
  int m = 1;
  ReturnAxis axis = ReturnAxis::y;  ///< the coordinate actually used
  long n_iter = 0, transient = 0;
  std::vector<double> u, v;  ///< pairs (x_k, x_{k+m})
  std::vector<ReturnMapBin> bins;
  std::array<double, 4> cubic{};  ///< v ~ c0 + c1 u + c2 u^2 + c3 u^3
  double cubic_rms = 0;
};

/// Pairs (x_k, x_{k+m}) for k in [transient, n_iter), so n_iter - transient
/// samples, with bin means and a least-squares cubic through the samples.
inline ReturnMapData return_map_extract(const Params& p, long n_iter, long transient, const ReturnMapOptions& opt = {}) {
  if (n_iter <= transient || transient < 0) fail(ErrorKind::invalid_input, "need n_iter > transient >= 0");
  if (opt.m < 1) fail(ErrorKind::invalid_input, "return power must be at least 1");
  if (opt.bins < 1) fail(ErrorKind::invalid_input, "need at least one bin");
  std::optional<Point2> start;
  const std::vector<Point2> seeds = opt.seed ? std::vector<Point2>{*opt.seed} : detail::orbit_seeds(p, opt.seed_offset);
  for (Point2 s : seeds)
    if ((start = detail::settle(p, s, transient, 1, opt.escape_radius))) break;
  if (!start) fail(ErrorKind::orbit_escaped, "every seed left the escape radius during the transient");

  const long count = n_iter - transient;
  std::vector<Point2> orbit;
  orbit.reserve(static_cast<std::size_t>(count + opt.m));
  Point2 q = *start;
  for (long k = 0; k < count + opt.m; ++k) {
    orbit.push_back(q);
    q = apply(p, q);
    if (detail::escaped_point(q, opt.escape_radius)) fail(ErrorKind::orbit_escaped, "orbit left the escape radius");
  }

  ReturnMapData r;
  r.params = p;
  r.m = opt.m;
  r.n_iter = n_iter;
  r.transient = transient;
  r.axis = opt.axis;
  if (r.axis == ReturnAxis::dominant) {
    double mx = 0, my = 0, sx = 0, sy = 0;
    for (const Point2& o : orbit) mx += o.x, my += o.y;
    mx /= static_cast<double>(orbit.size()), my /= static_cast<double>(orbit.size());
    for (const Point2& o : orbit) sx += (o.x - mx) * (o.x - mx), sy += (o.y - my) * (o.y - my);
    r.axis = sx > sy ? ReturnAxis::x : ReturnAxis::y;
  }
  auto coord = [&](const Point2& o) { return r.axis == ReturnAxis::x ? o.x : o.y; };
  r.u.reserve(static_cast<std::size_t>(count));
  r.v.reserve(static_cast<std::size_t>(count));
  for (long k = 0; k < count; ++k) {
    r.u.push_back(coord(orbit[static_cast<std::size_t>(k)]));
    r.v.push_back(coord(orbit[static_cast<std::size_t>(k + opt.m)]));
  }

  const auto [lo_it, hi_it] = std::minmax_element(r.u.begin(), r.u.end());
  const double lo = *lo_it, hi = *hi_it;
  const double width = hi > lo ? (hi - lo) / opt.bins : 1.0;
  std::vector<double> sums(static_cast<std::size_t>(opt.bins), 0.0);
  std::vector<long> counts(static_cast<std::size_t>(opt.bins), 0);
  for (std::size_t i = 0; i < r.u.size(); ++i) {
    const auto b = static_cast<std::size_t>(std::clamp<long>(static_cast<long>((r.u[i] - lo) / width), 0, opt.bins - 1));
    sums[b] += r.v[i];
    ++counts[b];
  }
  for (int b = 0; b < opt.bins; ++b) {
    const auto i = static_cast<std::size_t>(b);
    if (counts[i] > 0) r.bins.push_back({lo + (b + 0.5) * width, sums[i] / static_cast<double>(counts[i]), counts[i]});
  }

  if (r.u.size() >= 4) {
    const MonomialFit<double> fit = fit_monomials(r.u, r.v, {0, 1, 2, 3});
    for (int i = 0; i < 4; ++i) r.cubic[static_cast<std::size_t>(i)] = fit.coeffs[static_cast<std::size_t>(i)];
    r.cubic_rms = fit.rms;
  }
  return r;
}

}  // namespace henon_lab
