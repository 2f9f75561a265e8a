#pragma once

// The Henon family phi_{a,b}(x, y) = (y, a - b x + y^2), its inverse,
// differential, fixed points and the conjugacy with the classical form
// f_{a,b}(x, y) = (1 + y - a x^2, b x).

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <utility>

#include "henon_lab/error.hpp"

namespace henon_lab {

template <class R>
struct BasicParams {
  R a = 0;
  R b = 0;

  friend bool operator==(const BasicParams&, const BasicParams&) = default;
};

using Params = BasicParams<double>;

/// Plane vector over any scalar that supports ring arithmetic (double, Jet).
template <class T>
struct Vec2T {
  T x{};
  T y{};
};

using Point2 = Vec2T<double>;
using Vector2 = Vec2T<double>;

inline Vector2 operator+(Vector2 p, Vector2 q) { return {p.x + q.x, p.y + q.y}; }
inline Vector2 operator-(Vector2 p, Vector2 q) { return {p.x - q.x, p.y - q.y}; }
inline Vector2 operator*(double s, Vector2 p) { return {s * p.x, s * p.y}; }
inline double dot(Vector2 p, Vector2 q) { return p.x * q.x + p.y * q.y; }
inline double norm(Vector2 p) { return std::hypot(p.x, p.y); }
inline double distance(Point2 p, Point2 q) { return norm(p - q); }

template <class R, class T>
Vec2T<T> apply(const BasicParams<R>& p, const Vec2T<T>& q) {
  return {q.y, p.a - p.b * q.x + q.y * q.y};
}

template <class R, class T>
Vec2T<T> apply_inverse(const BasicParams<R>& p, const Vec2T<T>& q) {
  if (p.b == 0) fail(ErrorKind::degenerate_parameter, "the map is not invertible at b = 0");
  return {(p.a + q.x * q.x - q.y) / p.b, q.x};
}

template <class R, class T>
Vec2T<T> iterate(const BasicParams<R>& p, Vec2T<T> q, int n) {
  for (int i = 0; i < n; ++i) q = apply(p, q);
  return q;
}

template <class R, class T>
Vec2T<T> iterate_inverse(const BasicParams<R>& p, Vec2T<T> q, int n) {
  for (int i = 0; i < n; ++i) q = apply_inverse(p, q);
  return q;
}

template <class R>
struct BasicMatrix2 {
  std::array<std::array<R, 2>, 2> m{};

  const R& operator()(int i, int j) const { return m[i][j]; }
  R det() const { return m[0][0] * m[1][1] - m[0][1] * m[1][0]; }
  R trace() const { return m[0][0] + m[1][1]; }
  Vec2T<R> operator*(const Vec2T<R>& v) const { return {m[0][0] * v.x + m[0][1] * v.y, m[1][0] * v.x + m[1][1] * v.y}; }
  BasicMatrix2 operator*(const BasicMatrix2& o) const {
    BasicMatrix2 r;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) r.m[i][j] = m[i][0] * o.m[0][j] + m[i][1] * o.m[1][j];
    return r;
  }
};

using Matrix2 = BasicMatrix2<double>;

template <class R>
BasicMatrix2<R> jacobian(const BasicParams<R>& p, const Vec2T<R>& q) {
  BasicMatrix2<R> j;
  j.m[0] = {R(0), R(1)};
  j.m[1] = {R(-p.b), R(2 * q.y)};
  return j;
}

template <class R>
BasicMatrix2<R> jacobian_power(const BasicParams<R>& p, Vec2T<R> q, int n) {
  BasicMatrix2<R> acc;
  acc.m[0] = {R(1), R(0)};
  acc.m[1] = {R(0), R(1)};
  for (int i = 0; i < n; ++i) {
    acc = jacobian(p, q) * acc;
    q = apply(p, q);
  }
  return acc;
}

enum class Branch { plus, minus };

inline std::string to_string(Branch w) { return w == Branch::plus ? "plus" : "minus"; }

template <class R>
struct BasicFixedPointData {
  Branch which = Branch::plus;
  Vec2T<R> location;
  R lambda = 0;  ///< contracting eigenvalue
  R sigma = 0;   ///< expanding eigenvalue
  Vec2T<R> eig_vec_s;
  Vec2T<R> eig_vec_u;
  bool dissipative = false;
  BasicParams<R> params;
};

using FixedPointData = BasicFixedPointData<double>;

/// y^{+/-}_{a,b}; throws NoRealFixedPoints when the discriminant is not positive.
template <class R>
R fixed_point_coordinate(const BasicParams<R>& p, Branch w) {
  using std::sqrt;
  const R disc = (1 + p.b) * (1 + p.b) - 4 * p.a;
  if (!(disc > 0)) fail(ErrorKind::no_real_fixed_points, "(1+b)^2 - 4a <= 0");
  const R r = sqrt(disc);
  return w == Branch::plus ? R((1 + p.b + r) / 2) : R((1 + p.b - r) / 2);
}

namespace detail {
// Unit eigenvector of [[0,1],[-b,2y]] for eigenvalue m: (1, m) normalized,
// positive x-component.
template <class R>
Vec2T<R> unit_eigenvector(const R& m) {
  using std::sqrt;
  const R n = sqrt(1 + m * m);
  return {R(1 / n), R(m / n)};
}
}  // namespace detail

template <class R>
BasicFixedPointData<R> eigen_data(const BasicParams<R>& p, Branch w) {
  using std::abs;
  using std::sqrt;
  BasicFixedPointData<R> fp;
  fp.which = w;
  fp.params = p;
  const R y = fixed_point_coordinate(p, w);
  fp.location = {y, y};
  const R rad = y * y - p.b;
  if (!(rad > 0)) fail(ErrorKind::complex_eigenvalues, "(y^2 - b) <= 0 at the fixed point");
  const R r = sqrt(rad);
  R lam = y - r;
  R sig = y + r;
  // Keep lambda as the smaller magnitude.
  if (abs(lam) > abs(sig)) std::swap(lam, sig);
  // Recompute the small root from the product to avoid cancellation.
  if (sig != 0) lam = p.b / sig;
  fp.lambda = lam;
  fp.sigma = sig;
  fp.eig_vec_s = detail::unit_eigenvector(lam);
  fp.eig_vec_u = detail::unit_eigenvector(sig);
  fp.dissipative = abs(lam) > 0 && abs(lam) < 1 && abs(sig) > 1 && abs(lam * sig) < 1;
  return fp;
}

template <class R>
std::pair<BasicFixedPointData<R>, BasicFixedPointData<R>> fixed_points(const BasicParams<R>& p) {
  return {eigen_data(p, Branch::plus), eigen_data(p, Branch::minus)};
}

/// The classical map f_{a,b}(x, y) = (1 + y - a x^2, b x).
inline Point2 apply_classical(const Params& p, Point2 q) { return {1.0 + q.y - p.a * q.x * q.x, p.b * q.x}; }

/// ||h(f_{a,b}(q)) - phi_{-a,-b}(h(q))|| for h(x, y) = (-a y / b, -a x).
inline double conjugacy_residual(const Params& p, Point2 q) {
  if (p.a == 0.0 || p.b == 0.0) fail(ErrorKind::degenerate_parameter, "conjugacy requires a != 0 and b != 0");
  auto h = [&](Point2 v) { return Point2{-p.a * v.y / p.b, -p.a * v.x}; };
  const Params conj{-p.a, -p.b};
  const Point2 lhs = h(apply_classical(p, q));
  const Point2 rhs = apply(conj, h(q));
  const double scale = std::max({1.0, std::abs(lhs.x), std::abs(lhs.y), std::abs(rhs.x), std::abs(rhs.y)});
  return distance(lhs, rhs) / scale;
}

}  // namespace henon_lab
