#pragma once

#include <array>
#include <cmath>
#include <type_traits>

// Forward-mode scalars. Jet<T,N> carries a value and N first-order partials;
// nesting Jet<Jet<double,K>,M> yields mixed higher derivatives. All geometry
// kernels are templated on the scalar type so the same evaluation path serves
// plain doubles, tangents, and derivative towers.
namespace fgb {

template <class T, int N>
struct Jet {
  T a{};                 // value
  std::array<T, N> d{};  // partials

  Jet() = default;
  Jet(const T& v) : a(v) {}
  template <class U = T>
    requires(!std::is_same_v<U, double> && std::is_same_v<U, T>)
  Jet(double v) : a(v) {}

  Jet& operator+=(const Jet& o) {
    a += o.a;
    for (int i = 0; i < N; ++i) d[i] += o.d[i];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    a -= o.a;
    for (int i = 0; i < N; ++i) d[i] -= o.d[i];
    return *this;
  }
};

// value_of: strip all derivative structure.
inline double value_of(double x) { return x; }
template <class T, int N>
double value_of(const Jet<T, N>& x) {
  return value_of(x.a);
}

template <class T, int N>
Jet<T, N> operator-(const Jet<T, N>& x) {
  Jet<T, N> r;
  r.a = -x.a;
  for (int i = 0; i < N; ++i) r.d[i] = -x.d[i];
  return r;
}

template <class T, int N>
Jet<T, N> operator+(const Jet<T, N>& x, const Jet<T, N>& y) {
  Jet<T, N> r;
  r.a = x.a + y.a;
  for (int i = 0; i < N; ++i) r.d[i] = x.d[i] + y.d[i];
  return r;
}
template <class T, int N>
Jet<T, N> operator-(const Jet<T, N>& x, const Jet<T, N>& y) {
  Jet<T, N> r;
  r.a = x.a - y.a;
  for (int i = 0; i < N; ++i) r.d[i] = x.d[i] - y.d[i];
  return r;
}
template <class T, int N>
Jet<T, N> operator*(const Jet<T, N>& x, const Jet<T, N>& y) {
  Jet<T, N> r;
  r.a = x.a * y.a;
  for (int i = 0; i < N; ++i) r.d[i] = x.d[i] * y.a + x.a * y.d[i];
  return r;
}
template <class T, int N>
Jet<T, N> operator/(const Jet<T, N>& x, const Jet<T, N>& y) {
  Jet<T, N> r;
  r.a = x.a / y.a;
  const T inv = T(1.0) / y.a;
  for (int i = 0; i < N; ++i) r.d[i] = (x.d[i] - r.a * y.d[i]) * inv;
  return r;
}

// mixed scalar/jet arithmetic
template <class T, int N>
Jet<T, N> operator+(const Jet<T, N>& x, double c) {
  Jet<T, N> r = x;
  r.a += T(c);
  return r;
}
template <class T, int N>
Jet<T, N> operator+(double c, const Jet<T, N>& x) {
  return x + c;
}
template <class T, int N>
Jet<T, N> operator-(const Jet<T, N>& x, double c) {
  return x + (-c);
}
template <class T, int N>
Jet<T, N> operator-(double c, const Jet<T, N>& x) {
  return (-x) + c;
}
template <class T, int N>
Jet<T, N> operator*(const Jet<T, N>& x, double c) {
  Jet<T, N> r;
  r.a = x.a * T(c);
  for (int i = 0; i < N; ++i) r.d[i] = x.d[i] * T(c);
  return r;
}
template <class T, int N>
Jet<T, N> operator*(double c, const Jet<T, N>& x) {
  return x * c;
}
template <class T, int N>
Jet<T, N> operator/(const Jet<T, N>& x, double c) {
  return x * (1.0 / c);
}
template <class T, int N>
Jet<T, N> operator/(double c, const Jet<T, N>& x) {
  return Jet<T, N>(T(c)) / x;
}

template <class T, int N>
bool operator<(const Jet<T, N>& x, const Jet<T, N>& y) {
  return value_of(x) < value_of(y);
}
template <class T, int N>
bool operator<(const Jet<T, N>& x, double y) {
  return value_of(x) < y;
}
template <class T, int N>
bool operator>(const Jet<T, N>& x, double y) {
  return value_of(x) > y;
}

using std::atan2;
using std::cos;
using std::exp;
using std::log;
using std::pow;
using std::sin;
using std::sqrt;

template <class T, int N>
Jet<T, N> sqrt(const Jet<T, N>& x) {
  Jet<T, N> r;
  r.a = sqrt(x.a);
  const T s = T(0.5) / r.a;
  for (int i = 0; i < N; ++i) r.d[i] = x.d[i] * s;
  return r;
}
template <class T, int N>
Jet<T, N> sin(const Jet<T, N>& x) {
  Jet<T, N> r;
  r.a = sin(x.a);
  const T c = cos(x.a);
  for (int i = 0; i < N; ++i) r.d[i] = x.d[i] * c;
  return r;
}
template <class T, int N>
Jet<T, N> cos(const Jet<T, N>& x) {
  Jet<T, N> r;
  r.a = cos(x.a);
  const T s = -sin(x.a);
  for (int i = 0; i < N; ++i) r.d[i] = x.d[i] * s;
  return r;
}
template <class T, int N>
Jet<T, N> exp(const Jet<T, N>& x) {
  Jet<T, N> r;
  r.a = exp(x.a);
  for (int i = 0; i < N; ++i) r.d[i] = x.d[i] * r.a;
  return r;
}
template <class T, int N>
Jet<T, N> log(const Jet<T, N>& x) {
  Jet<T, N> r;
  r.a = log(x.a);
  const T inv = T(1.0) / x.a;
  for (int i = 0; i < N; ++i) r.d[i] = x.d[i] * inv;
  return r;
}
// x^c for constant real exponent, x > 0
template <class T, int N>
Jet<T, N> pow(const Jet<T, N>& x, double c) {
  Jet<T, N> r;
  r.a = pow(x.a, c);
  const T s = T(c) * pow(x.a, c - 1.0);
  for (int i = 0; i < N; ++i) r.d[i] = x.d[i] * s;
  return r;
}
template <class T, int N>
Jet<T, N> atan2(const Jet<T, N>& y, const Jet<T, N>& x) {
  Jet<T, N> r;
  r.a = atan2(y.a, x.a);
  const T inv = T(1.0) / (x.a * x.a + y.a * y.a);
  for (int i = 0; i < N; ++i) r.d[i] = (x.a * y.d[i] - y.a * x.d[i]) * inv;
  return r;
}

// Complex coefficient over a (possibly jet-valued) real scalar. std::complex
// is only specified for float/double, hence a small replacement.
template <class S>
struct Cplx {
  S re{}, im{};

  Cplx() = default;
  Cplx(const S& r) : re(r) {}
  Cplx(const S& r, const S& i) : re(r), im(i) {}
  template <class U = S>
    requires(!std::is_same_v<U, double> && std::is_same_v<U, S>)
  Cplx(double r) : re(S(r)) {}

  Cplx& operator+=(const Cplx& o) {
    re += o.re;
    im += o.im;
    return *this;
  }
  Cplx& operator-=(const Cplx& o) {
    re -= o.re;
    im -= o.im;
    return *this;
  }
};

template <class S>
Cplx<S> operator-(const Cplx<S>& z) {
  return {-z.re, -z.im};
}
template <class S>
Cplx<S> operator+(const Cplx<S>& a, const Cplx<S>& b) {
  return {a.re + b.re, a.im + b.im};
}
template <class S>
Cplx<S> operator-(const Cplx<S>& a, const Cplx<S>& b) {
  return {a.re - b.re, a.im - b.im};
}
template <class S>
Cplx<S> operator*(const Cplx<S>& a, const Cplx<S>& b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
template <class S>
  requires(!std::is_same_v<S, double>)
Cplx<S> operator*(const Cplx<S>& a, double c) {
  return {a.re * c, a.im * c};
}
template <class S>
  requires(!std::is_same_v<S, double>)
Cplx<S> operator*(double c, const Cplx<S>& a) {
  return {a.re * c, a.im * c};
}
template <class S>
Cplx<S> operator*(const Cplx<S>& a, const S& c) {
  return {a.re * c, a.im * c};
}
template <class S>
Cplx<S> operator*(const S& c, const Cplx<S>& a) {
  return a * c;
}
template <class S>
Cplx<S> operator/(const Cplx<S>& a, const Cplx<S>& b) {
  const S n = b.re * b.re + b.im * b.im;
  return {(a.re * b.re + a.im * b.im) / n, (a.im * b.re - a.re * b.im) / n};
}
template <class S>
Cplx<S> operator/(const Cplx<S>& a, double c) {
  return a * (1.0 / c);
}

// multiply by the imaginary unit
template <class S>
Cplx<S> times_i(const Cplx<S>& z) {
  return {-z.im, z.re};
}

// e^z, needed for the scalar block of exponentials of even elements
template <class S>
Cplx<S> cexp(const Cplx<S>& z) {
  const S m = exp(z.re);
  return {m * cos(z.im), m * sin(z.im)};
}

// true when every stored component (value and all nested partials) is zero
inline bool all_zero(double x) { return x == 0.0; }
template <class T, int N>
bool all_zero(const Jet<T, N>& x) {
  if (!all_zero(x.a)) return false;
  for (int i = 0; i < N; ++i)
    if (!all_zero(x.d[i])) return false;
  return true;
}
template <class S>
bool all_zero(const Cplx<S>& z) {
  return all_zero(z.re) && all_zero(z.im);
}

inline double abs_value(double x) { return x < 0 ? -x : x; }
template <class S>
double abs_value(const Cplx<S>& z) {
  const double r = value_of(z.re), i = value_of(z.im);
  return std::sqrt(r * r + i * i);
}
template <class T, int N>
double abs_value(const Jet<T, N>& x) {
  return std::abs(value_of(x));
}

}  // namespace fgb
