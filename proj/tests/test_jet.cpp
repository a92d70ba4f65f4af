#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fgb/jet.hpp"

using fgb::Cplx;
using fgb::Jet;

namespace {

// central finite difference, step tuned for first derivatives of smooth maps
template <class F>
double fd(F f, double x, double h = 1e-6) {
  return (f(x + h) - f(x - h)) / (2 * h);
}

}  // namespace

TEST_CASE("first derivatives match finite differences") {
  auto f = [](auto x) {
    return sin(x) * exp(0.3 * x) + sqrt(x + 2.0) / (x + 3.0) + pow(x + 2.0, 0.25);
  };
  for (double x : {-0.7, 0.0, 0.9, 2.3}) {
    Jet<double, 1> j(x);
    j.d[0] = 1.0;
    auto r = f(j);
    CHECK(r.a == doctest::Approx(f(x)).epsilon(1e-14));
    CHECK(r.d[0] == doctest::Approx(fd(f, x)).epsilon(1e-8));
  }
}

TEST_CASE("nested jets produce second and third derivatives") {
  // f(x) = x^3 sin x; check f'' and f''' analytically
  auto f = [](auto x) { return x * x * x * sin(x); };
  const double x0 = 0.8;
  using J1 = Jet<double, 1>;
  using J2 = Jet<J1, 1>;
  using J3 = Jet<J2, 1>;
  J3 x{J2{J1{x0}}};
  x.a.a.d[0] = 1.0;
  x.a.d[0].a = 1.0;
  x.d[0].a.a = 1.0;
  auto r = f(x);
  const double s = std::sin(x0), c = std::cos(x0);
  const double f2 = 6 * x0 * s + 6 * x0 * x0 * c - x0 * x0 * x0 * s;
  const double f3 = 6 * s + 18 * x0 * c - 9 * x0 * x0 * s - x0 * x0 * x0 * c;
  CHECK(r.d[0].a.d[0] == doctest::Approx(f2).epsilon(1e-12));
  CHECK(r.d[0].d[0].d[0] == doctest::Approx(f3).epsilon(1e-12));
}

TEST_CASE("multi-slot jets give gradients in one pass") {
  auto f = [](auto x, auto y) { return atan2(y, x) + x * y * y; };
  const double x0 = 1.1, y0 = -0.4;
  Jet<double, 2> x(x0), y(y0);
  x.d[0] = 1.0;
  y.d[1] = 1.0;
  auto r = f(x, y);
  const double den = x0 * x0 + y0 * y0;
  CHECK(r.d[0] == doctest::Approx(-y0 / den + y0 * y0).epsilon(1e-13));
  CHECK(r.d[1] == doctest::Approx(x0 / den + 2 * x0 * y0).epsilon(1e-13));
}

TEST_CASE("complex arithmetic and exponential") {
  Cplx<double> z(0.3, -1.2), w(-0.8, 0.5);
  auto p = z * w;
  CHECK(p.re == doctest::Approx(0.3 * -0.8 - (-1.2) * 0.5));
  CHECK(p.im == doctest::Approx(0.3 * 0.5 + (-1.2) * -0.8));
  auto q = z / w;
  auto back = q * w;
  CHECK(back.re == doctest::Approx(z.re).epsilon(1e-14));
  CHECK(back.im == doctest::Approx(z.im).epsilon(1e-14));
  auto e = fgb::cexp(z);
  CHECK(e.re == doctest::Approx(std::exp(0.3) * std::cos(-1.2)));
  CHECK(e.im == doctest::Approx(std::exp(0.3) * std::sin(-1.2)));
  auto iz = fgb::times_i(z);
  CHECK(iz.re == doctest::Approx(1.2));
  CHECK(iz.im == doctest::Approx(0.3));
}
