#pragma once

// Truncated Taylor arithmetic in one variable.
//
// A Jet<N> stores normalized Taylor coefficients c_k = f^(k)(t0) / k! for
// k = 0..N. All arithmetic is exact for polynomial maps up to truncation, so
// pushing a jet through the Henon map (or its inverse) transports curve
// derivatives without any differencing.

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "henon_lab/error.hpp"

namespace henon_lab {

inline constexpr int kJetOrder = 4;

constexpr double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

template <int N, class T = double>
class Jet {
  static_assert(N >= 1, "jets need at least first order");

 public:
  static constexpr int order = N;

  Jet() = default;
  Jet(T value) { c_[0] = value; }  // NOLINT: implicit constant promotion

  /// Identity jet t0 + dt.
  static Jet variable(T t0) {
    Jet j(t0);
    j.c_[1] = 1;
    return j;
  }

  static Jet from_coefficients(const std::array<T, N + 1>& c) {
    Jet j;
    j.c_ = c;
    return j;
  }

  /// Jet of d/dt^k values (unnormalized derivatives).
  static Jet from_derivatives(const std::array<T, N + 1>& d) {
    Jet j;
    for (int k = 0; k <= N; ++k) j.c_[k] = d[k] / T(factorial(k));
    return j;
  }

  const T& value() const { return c_[0]; }
  const T& coeff(int k) const { return c_[k]; }
  T& coeff(int k) { return c_[k]; }
  const std::array<T, N + 1>& coefficients() const { return c_; }

  /// k-th derivative with respect to the jet variable.
  T derivative(int k) const { return c_[k] * T(factorial(k)); }

  bool finite() const {
    using std::isfinite;
    for (const T& v : c_)
      if (!isfinite(v)) return false;
    return true;
  }

  /// Evaluate the truncated polynomial at offset dt from the expansion point.
  T evaluate(T dt) const {
    T r = c_[N];
    for (int k = N - 1; k >= 0; --k) r = r * dt + c_[k];
    return r;
  }

  /// Re-expand around t0 + dt (exact for the truncated polynomial).
  Jet recenter(T dt) const {
    Jet r = *this;
    for (int k = 0; k < N; ++k)
      for (int i = N - 1; i >= k; --i) r.c_[i] += dt * r.c_[i + 1];
    return r;
  }

  /// Jet of the t-derivative, truncated one order lower (top coefficient is 0).
  Jet differentiate() const {
    Jet d;
    for (int k = 0; k < N; ++k) d.c_[k] = T(k + 1) * c_[k + 1];
    return d;
  }

  Jet& operator+=(const Jet& o) {
    for (int k = 0; k <= N; ++k) c_[k] += o.c_[k];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    for (int k = 0; k <= N; ++k) c_[k] -= o.c_[k];
    return *this;
  }
  Jet& operator*=(T s) {
    for (T& v : c_) v *= s;
    return *this;
  }
  Jet& operator/=(T s) {
    for (T& v : c_) v /= s;
    return *this;
  }
  Jet& operator*=(const Jet& o) { return *this = *this * o; }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator-(Jet a) {
    for (T& v : a.c_) v = -v;
    return a;
  }
  friend Jet operator*(Jet a, T s) { return a *= s; }
  friend Jet operator*(T s, Jet a) { return a *= s; }
  friend Jet operator/(Jet a, T s) { return a /= s; }
  friend Jet operator+(Jet a, T s) {
    a.c_[0] += s;
    return a;
  }
  friend Jet operator+(T s, Jet a) { return a + s; }
  friend Jet operator-(Jet a, T s) {
    a.c_[0] -= s;
    return a;
  }
  friend Jet operator-(T s, const Jet& a) { return -a + s; }

  friend Jet operator*(const Jet& a, const Jet& b) {
    Jet r;
    for (int i = 0; i <= N; ++i) {
      if (a.c_[i] == 0) continue;
      for (int j = 0; i + j <= N; ++j) r.c_[i + j] += a.c_[i] * b.c_[j];
    }
    return r;
  }

  friend Jet operator/(const Jet& a, const Jet& b) {
    if (b.c_[0] == 0) fail(ErrorKind::out_of_domain, "jet division by a jet vanishing at the center");
    Jet r;
    for (int k = 0; k <= N; ++k) {
      T s = a.c_[k];
      for (int j = 1; j <= k; ++j) s -= b.c_[j] * r.c_[k - j];
      r.c_[k] = s / b.c_[0];
    }
    return r;
  }

 private:
  std::array<T, N + 1> c_{};
};

/// Evaluate the Taylor expansion `outer` (centered at inner.value()) on the
/// jet `inner`: returns the jet of f(inner(t)) where f has normalized Taylor
/// coefficients `outer` at inner(t0).
template <int N, class T>
Jet<N, T> compose(const Jet<N, T>& outer, const Jet<N, T>& inner) {
  Jet<N, T> shift = inner - inner.value();
  Jet<N, T> r(outer.coeff(N));
  for (int k = N - 1; k >= 0; --k) r = r * shift + outer.coeff(k);
  return r;
}

/// Series reversion. Given x(t) = x0 + x1 dt + ..., returns the jet of
/// dt(dx) with x(t0 + dt(dx)) = x0 + dx; the result is centered at 0.
template <int N, class T>
Jet<N, T> revert(const Jet<N, T>& x) {
  using std::isfinite;
  const T x1 = x.coeff(1);
  if (x1 == 0 || !isfinite(x1)) fail(ErrorKind::not_a_graph, "series reversion with vanishing first derivative");
  Jet<N, T> dt = Jet<N, T>::variable(T(0)) / x1;
  Jet<N, T> higher = x - x.value();
  higher.coeff(1) = 0;
  // Each sweep fixes one more order of dt.
  for (int it = 1; it < N; ++it) {
    Jet<N, T> xi = Jet<N, T>::variable(T(0));
    Jet<N, T> rhs = xi - compose(higher, dt);
    dt = rhs / x1;
  }
  return dt;
}

/// Reparametrize y(t) as a function of x, given jets of x(t) and y(t) at the
/// same base point. Returns normalized Taylor coefficients of y(x) centered
/// at x(t0).
template <int N, class T>
Jet<N, T> graph_over(const Jet<N, T>& x, const Jet<N, T>& y) {
  Jet<N, T> dt = revert(x);
  const Jet<N, T>& shifted = y;  // y as a series in dt, composed with dt(dx)
  Jet<N, T> r(shifted.coeff(N));
  for (int k = N - 1; k >= 0; --k) r = r * dt + shifted.coeff(k);
  return r;
}

/// Dynamic-length truncated power series used by the parameterization method,
/// where the degree is a runtime choice.
template <class T>
class BasicSeries {
 public:
  BasicSeries() = default;
  explicit BasicSeries(int degree, T constant = T(0)) : c_(static_cast<std::size_t>(degree) + 1, T(0)) {
    c_[0] = constant;
  }

  int degree() const { return static_cast<int>(c_.size()) - 1; }
  T operator[](int k) const { return c_[static_cast<std::size_t>(k)]; }
  T& operator[](int k) { return c_[static_cast<std::size_t>(k)]; }

  BasicSeries& operator+=(const BasicSeries& o) {
    for (int k = 0; k <= degree(); ++k) c_[k] += o[k];
    return *this;
  }
  BasicSeries& operator-=(const BasicSeries& o) {
    for (int k = 0; k <= degree(); ++k) c_[k] -= o[k];
    return *this;
  }
  BasicSeries& operator*=(T s) {
    for (T& v : c_) v *= s;
    return *this;
  }
  friend BasicSeries operator+(BasicSeries a, const BasicSeries& b) { return a += b; }
  friend BasicSeries operator-(BasicSeries a, const BasicSeries& b) { return a -= b; }
  friend BasicSeries operator-(BasicSeries a) { return a *= T(-1); }
  friend BasicSeries operator*(BasicSeries a, T s) { return a *= s; }
  friend BasicSeries operator*(T s, BasicSeries a) { return a *= s; }
  friend BasicSeries operator/(BasicSeries a, T s) { return a *= T(1) / s; }
  friend BasicSeries operator+(BasicSeries a, T s) {
    a.c_[0] += s;
    return a;
  }
  friend BasicSeries operator+(T s, BasicSeries a) { return a + s; }
  friend BasicSeries operator-(BasicSeries a, T s) {
    a.c_[0] -= s;
    return a;
  }
  friend BasicSeries operator-(T s, const BasicSeries& a) { return -a + s; }
  friend BasicSeries operator*(const BasicSeries& a, const BasicSeries& b) {
    BasicSeries r(a.degree());
    for (int i = 0; i <= a.degree(); ++i) {
      if (a[i] == 0) continue;
      for (int j = 0; i + j <= a.degree(); ++j) r[i + j] += a[i] * b[j];
    }
    return r;
  }

  T evaluate(T t) const {
    T r = c_.back();
    for (int k = degree() - 1; k >= 0; --k) r = r * t + c_[k];
    return r;
  }

  /// Jet of the polynomial re-expanded around t (exact up to order N).
  template <int N>
  Jet<N, T> jet_at(T t) const {
    Jet<N, T> out;
    // Derivatives of a polynomial via repeated synthetic division.
    std::vector<T> work(c_);
    for (int k = 0; k <= N && k <= degree(); ++k) {
      T r = 0;
      for (int i = degree(); i >= k; --i) {
        r = r * t + work[i];
        work[i] = r;
      }
      out.coeff(k) = work[k];
    }
    return out;
  }

 private:
  std::vector<T> c_;
};

using Series = BasicSeries<double>;

}  // namespace henon_lab
