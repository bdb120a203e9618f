#pragma once

// Closed-form scalar functions: the ground state and its derivatives, and the
// C-infinity cutoffs. The templates accept double or Jet<N>.

#include <cmath>
#include <numbers>

#include "gkdv/jet.hpp"

namespace gkdv {

namespace detail {
inline double value(double x) { return x; }
template <std::size_t N>
double value(const Jet<N>& x) { return x.c[0]; }
}  // namespace detail

// exp(-1/u) for u > 0, flat zero otherwise
template <class T>
T flat_bump(const T& u) {
  using std::exp;
  if (detail::value(u) <= 1e-3) return T(0.0);
  return exp(-1.0 / u);
}

// 0 for u <= 0, 1 for u >= 1, strictly increasing in between
template <class T>
T smooth_step(const T& u) {
  const double v = detail::value(u);
  if (v <= 0.0) return T(0.0);
  if (v >= 1.0) return T(1.0);
  const T a = flat_bump(u);
  const T b = flat_bump(1.0 - u);
  return a / (a + b);
}

// chi = 0 on (-inf, -2], 1 on [-1, inf)
template <class T>
T cutoff_chi(const T& x) {
  return smooth_step(x + 2.0);
}

// psi(y) = exp(2y(1 - S(4y + 3))): e^{2y} for y < -3/4, 1 for y > -1/2
template <class T>
T psi_shape(const T& y) {
  using std::exp;
  if (detail::value(y) >= -0.5) return T(1.0);
  return exp(2.0 * y * (1.0 - smooth_step(4.0 * y + 3.0)));
}

namespace ground {

inline const double q0 = std::pow(3.0, 0.25);

// sech(2y), robust for large |y|
inline double sech2y(double y) {
  const double e = std::exp(-2.0 * std::fabs(y));
  return 2.0 * e / (1.0 + e * e);
}

inline double q(double y) { return q0 * std::sqrt(sech2y(y)); }
inline double dq(double y) { return -std::tanh(2.0 * y) * q(y); }
inline double d2q(double y) {
  const double v = q(y);
  const double v2 = v * v;
  return v - v2 * v2 * v;
}
inline double d3q(double y) {
  const double v = q(y);
  const double v2 = v * v;
  return dq(y) * (1.0 - 5.0 * v2 * v2);
}
inline double lambda_q(double y) { return 0.5 * q(y) + y * dq(y); }
inline double lambda_q_prime(double y) { return 1.5 * dq(y) + y * d2q(y); }
inline double y_lambda_q(double y) { return y * lambda_q(y); }
inline double y_lambda_q_prime(double y) { return lambda_q(y) + y * lambda_q_prime(y); }
inline double q_cubed(double y) {
  const double v = q(y);
  return v * v * v;
}

// Jet version from the sech representation, valid for |y| < 150.
template <std::size_t N>
Jet<N> q(const Jet<N>& y) {
  if (std::fabs(y.c[0]) > 150.0) return Jet<N>(0.0);
  const Jet<N> s = 2.0 / (exp(2.0 * y) + exp(-2.0 * y));
  return q0 * pow(s, 0.5);
}

inline constexpr double mass = std::numbers::sqrt3 * std::numbers::pi / 2.0;

}  // namespace ground

}  // namespace gkdv
