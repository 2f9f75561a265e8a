#pragma once

// Scalar types and small dense solvers shared by the tangency solvers.
//
// Most of the library runs in double. The cubic homoclinic tangency near
// (-2, 0) lives on parameter scales far below double resolution, so the
// map, jets and local manifolds are templated and also instantiated with a
// 50-digit binary float.

#include <array>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/eigen.hpp>

#include "henon_lab/error.hpp"

namespace henon_lab {

using Real = boost::multiprecision::cpp_bin_float_50;

template <class R>
double to_double(const R& v) {
  if constexpr (std::is_same_v<R, double>) {
    return v;
  } else {
    return v.template convert_to<double>();
  }
}

/// Round-trip decimal text for any supported scalar.
template <class R>
std::string to_decimal(const R& v) {
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<R>::max_digits10) << v;
  return os.str();
}

template <class R>
R from_decimal(const std::string& s) {
  try {
    if constexpr (std::is_same_v<R, double>) {
      std::size_t pos = 0;
      const double v = std::stod(s, &pos);
      if (pos != s.size()) fail(ErrorKind::invalid_input, "trailing characters in number '" + s + "'");
      return v;
    } else {
      return R(s);
    }
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    fail(ErrorKind::invalid_input, "not a number: '" + s + "'");
  }
}

/// Solve A x = rhs by Gaussian elimination with partial pivoting. Returns
/// false when a pivot vanishes.
template <class R, std::size_t N>
bool solve_linear(std::array<std::array<R, N>, N> a, std::array<R, N> rhs, std::array<R, N>& x) {
  using std::abs;
  for (std::size_t c = 0; c < N; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < N; ++r)
      if (abs(a[r][c]) > abs(a[piv][c])) piv = r;
    if (a[piv][c] == 0) return false;
    std::swap(a[piv], a[c]);
    std::swap(rhs[piv], rhs[c]);
    for (std::size_t r = c + 1; r < N; ++r) {
      const R f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < N; ++k) a[r][k] -= f * a[c][k];
      rhs[r] -= f * rhs[c];
    }
  }
  for (std::size_t c = N; c-- > 0;) {
    R s = rhs[c];
    for (std::size_t k = c + 1; k < N; ++k) s -= a[c][k] * x[k];
    x[c] = s / a[c][c];
  }
  return true;
}

template <class R>
struct MonomialFit {
  std::vector<int> powers;
  std::vector<R> coeffs;     ///< coeffs[i] multiplies x^powers[i]
  std::vector<R> residuals;  ///< y - model at each sample
  R rms = 0;
};

/// Least squares y ~ sum c_i x^p_i by column-pivoted QR.
template <class R>
MonomialFit<R> fit_monomials(const std::vector<R>& x, const std::vector<R>& y, const std::vector<int>& powers) {
  using std::sqrt;
  using Matrix = Eigen::Matrix<R, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<R, Eigen::Dynamic, 1>;
  if (x.size() != y.size()) fail(ErrorKind::invalid_input, "fit needs as many ordinates as abscissae");
  if (x.size() < powers.size() || powers.empty()) fail(ErrorKind::invalid_input, "fit is underdetermined");
  const auto rows = static_cast<Eigen::Index>(x.size());
  const auto cols = static_cast<Eigen::Index>(powers.size());
  Matrix a(rows, cols);
  Vector b(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const R& xi = x[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < cols; ++j) {
      R v = 1;
      for (int k = 0; k < powers[static_cast<std::size_t>(j)]; ++k) v *= xi;
      a(i, j) = v;
    }
    b(i) = y[static_cast<std::size_t>(i)];
  }
  const Vector c = a.colPivHouseholderQr().solve(b);
  const Vector r = b - a * c;
  MonomialFit<R> out;
  out.powers = powers;
  for (Eigen::Index j = 0; j < cols; ++j) out.coeffs.push_back(c(j));
  R ss = 0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    out.residuals.push_back(r(i));
    ss += r(i) * r(i);
  }
  out.rms = sqrt(ss / R(rows));
  return out;
}

}  // namespace henon_lab
