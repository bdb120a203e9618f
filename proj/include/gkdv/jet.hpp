#pragma once

// Truncated Taylor arithmetic. A Jet<N> holds c[k] = f^{(k)}(x0)/k! for k <= N,
// which is enough to push closed-form profiles through to their derivatives.

#include <array>
#include <cmath>
#include <cstddef>

namespace gkdv {

template <std::size_t N>
struct Jet {
  std::array<double, N + 1> c{};

  constexpr Jet() = default;
  constexpr Jet(double v) { c[0] = v; }  // NOLINT: implicit constant lift

  static constexpr Jet variable(double x) {
    Jet j(x);
    if constexpr (N >= 1) j.c[1] = 1.0;
    return j;
  }

  constexpr double value() const { return c[0]; }

  // k-th derivative at the expansion point.
  constexpr double derivative(std::size_t k) const {
    double f = 1.0;
    for (std::size_t i = 2; i <= k; ++i) f *= static_cast<double>(i);
    return c[k] * f;
  }

  Jet& operator+=(const Jet& o) {
    for (std::size_t k = 0; k <= N; ++k) c[k] += o.c[k];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    for (std::size_t k = 0; k <= N; ++k) c[k] -= o.c[k];
    return *this;
  }
  Jet& operator*=(double s) {
    for (auto& v : c) v *= s;
    return *this;
  }
};

template <std::size_t N>
Jet<N> operator+(Jet<N> a, const Jet<N>& b) { return a += b; }
template <std::size_t N>
Jet<N> operator-(Jet<N> a, const Jet<N>& b) { return a -= b; }
template <std::size_t N>
Jet<N> operator-(Jet<N> a) { return a *= -1.0; }
template <std::size_t N>
Jet<N> operator+(Jet<N> a, double s) { a.c[0] += s; return a; }
template <std::size_t N>
Jet<N> operator+(double s, Jet<N> a) { a.c[0] += s; return a; }
template <std::size_t N>
Jet<N> operator-(Jet<N> a, double s) { a.c[0] -= s; return a; }
template <std::size_t N>
Jet<N> operator-(double s, const Jet<N>& a) { return Jet<N>(s) - a; }
template <std::size_t N>
Jet<N> operator*(Jet<N> a, double s) { return a *= s; }
template <std::size_t N>
Jet<N> operator*(double s, Jet<N> a) { return a *= s; }
template <std::size_t N>
Jet<N> operator/(Jet<N> a, double s) { return a *= 1.0 / s; }

template <std::size_t N>
Jet<N> operator*(const Jet<N>& a, const Jet<N>& b) {
  Jet<N> r;
  for (std::size_t k = 0; k <= N; ++k)
    for (std::size_t i = 0; i <= k; ++i) r.c[k] += a.c[i] * b.c[k - i];
  return r;
}

template <std::size_t N>
Jet<N> operator/(const Jet<N>& a, const Jet<N>& b) {
  Jet<N> r;
  for (std::size_t k = 0; k <= N; ++k) {
    double s = a.c[k];
    for (std::size_t i = 1; i <= k; ++i) s -= b.c[i] * r.c[k - i];
    r.c[k] = s / b.c[0];
  }
  return r;
}

template <std::size_t N>
Jet<N> operator/(double s, const Jet<N>& b) { return Jet<N>(s) / b; }

template <std::size_t N>
Jet<N> exp(const Jet<N>& a) {
  Jet<N> r;
  r.c[0] = std::exp(a.c[0]);
  for (std::size_t k = 1; k <= N; ++k) {
    double s = 0.0;
    for (std::size_t j = 1; j <= k; ++j) s += static_cast<double>(j) * a.c[j] * r.c[k - j];
    r.c[k] = s / static_cast<double>(k);
  }
  return r;
}

template <std::size_t N>
Jet<N> log(const Jet<N>& a) {
  Jet<N> r;
  r.c[0] = std::log(a.c[0]);
  for (std::size_t k = 1; k <= N; ++k) {
    double s = 0.0;
    for (std::size_t j = 1; j < k; ++j) s += static_cast<double>(j) * r.c[j] * a.c[k - j];
    r.c[k] = (a.c[k] - s / static_cast<double>(k)) / a.c[0];
  }
  return r;
}

// a^p for a > 0, via the ODE a f' = p a' f (no spurious log of the value).
template <std::size_t N>
Jet<N> pow(const Jet<N>& a, double p) {
  Jet<N> r;
  r.c[0] = std::pow(a.c[0], p);
  for (std::size_t k = 1; k <= N; ++k) {
    double s = 0.0;
    for (std::size_t j = 1; j <= k; ++j) {
      const double jd = static_cast<double>(j);
      s += (p * jd - static_cast<double>(k - j)) * a.c[j] * r.c[k - j];
    }
    r.c[k] = s / (static_cast<double>(k) * a.c[0]);
  }
  return r;
}

template <std::size_t N>
Jet<N> tanh(const Jet<N>& a) {
  // tanh' = 1 - tanh^2, solved order by order
  Jet<N> t;
  t.c[0] = std::tanh(a.c[0]);
  for (std::size_t k = 1; k <= N; ++k) {
    Jet<N> sq = t * t;
    double s = 0.0;
    for (std::size_t j = 1; j <= k; ++j) {
      const double om = (k - j == 0 ? 1.0 : 0.0) - sq.c[k - j];
      s += static_cast<double>(j) * a.c[j] * om;
    }
    t.c[k] = s / static_cast<double>(k);
  }
  return t;
}

inline double value_of(double x) { return x; }
template <std::size_t N>
double value_of(const Jet<N>& j) { return j.c[0]; }

}  // namespace gkdv
