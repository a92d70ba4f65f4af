#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "fgb/connections.hpp"
#include "fgb/geometry.hpp"
#include "fgb/metrics.hpp"

using namespace fgb;

namespace {

std::mt19937 rng(77123);
double uni(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }

V2<double> random_base(bool sphere_chart) {
  if (sphere_chart) {
    const double r = uni(0.05, 1.1), phi = uni(0.0, 2 * M_PI);
    return {r * std::cos(phi), r * std::sin(phi)};
  }
  return {uni(0.0, 2 * M_PI), uni(0.0, 2 * M_PI)};
}

V2<double> random_dir() {
  const double a = uni(0.0, 2 * M_PI), s = uni(0.5, 2.0);
  return {s * std::cos(a), s * std::sin(a)};
}

// second-order central finite differences of F^2 in y (independent oracle)
template <class M>
double fd_hessian_F2(const M& m, int chart, V2<double> x, V2<double> y, int i, int j,
                     double h = 1e-4) {
  auto f = [&](double di, double dj) {
    V2<double> yy = y;
    yy[size_t(i)] += di;
    yy[size_t(j)] += dj;
    return m.F2(chart, x, yy);
  };
  if (i == j)
    return (f(h, 0) - 2.0 * f(0, 0) + f(-h, 0)) / (h * h);
  return (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4 * h * h);
}

template <class M>
double fd_third_F2(const M& m, int chart, V2<double> x, V2<double> y, int i, int j, int k,
                   double h = 2e-3) {
  auto g2 = [&](double dk) {
    V2<double> yy = y;
    yy[size_t(k)] += dk;
    return fd_hessian_F2(m, chart, x, yy, i, j, h);
  };
  return (g2(h) - g2(-h)) / (2 * h);
}

// indicatrix arc length in the induced fiber metric (refined oracle for V)
template <class M>
double arclength_volume(const M& m, int chart, V2<double> x, int nodes, double shift = 0.0) {
  double acc = 0.0;
  const double step = 2 * M_PI / nodes;
  for (int k = 0; k < nodes; ++k) {
    const double th = shift + step * k;
    const V2<double> y = y_of_theta(m, chart, x, th);
    const V2<double> yp = dy_dtheta(m, chart, x, th);
    const M2<double> g = fundamental_tensor(m, chart, x, y);
    acc += std::sqrt(dot_g(g, yp, yp));
  }
  return acc * step;
}

// Christoffel symbols of the round conformal metric (test oracle)
void sphere_christoffel(const V2<double>& x, double gamma[2][2][2]) {
  const double r2 = x[0] * x[0] + x[1] * x[1];
  const V2<double> s = {-2 * x[0] / (1 + r2), -2 * x[1] / (1 + r2)};
  for (int k = 0; k < 2; ++k)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        gamma[k][i][j] = (k == i ? s[size_t(j)] : 0.0) + (k == j ? s[size_t(i)] : 0.0) -
                         (i == j ? s[size_t(k)] : 0.0);
}

}  // namespace

TEST_CASE("fundamental tensor: quadratic metrics") {
  FlatTorus flat;
  for (int t = 0; t < 20; ++t) {
    const auto g = fundamental_tensor(flat, 0, random_base(false), random_dir());
    CHECK(g[0][0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(g[1][1] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(g[0][1]) < 1e-14);
  }

  RoundSphere sph;
  for (int t = 0; t < 20; ++t) {
    const V2<double> x = random_base(true);
    const double lam = sphere_conformal(x);
    const auto g1 = fundamental_tensor(sph, 0, x, random_dir());
    const auto g2 = fundamental_tensor(sph, 0, x, random_dir());
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        CHECK(g1[i][j] == doctest::Approx(g2[i][j]).epsilon(1e-13));  // y-independent
        CHECK(g1[i][j] == doctest::Approx(i == j ? lam : 0.0).scale(lam).epsilon(1e-13));
      }
  }
}

TEST_CASE("fundamental tensor: Randers vs finite-difference Hessian") {
  RandersTorus m{0.3, 0.0};  // constant beta = 0.3 dx1
  const V2<double> x = {1.0, 2.0};
  const V2<double> y = {1.0, 0.0};
  const auto g = fundamental_tensor(m, 0, x, y);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      CHECK(g[i][j] == doctest::Approx(0.5 * fd_hessian_F2(m, 0, x, y, i, j)).epsilon(1e-6));
  // positive definite
  CHECK(g[0][0] > 0.0);
  CHECK(det2(g) > 0.0);
}

TEST_CASE("homogeneity ladder across the zoo") {
  auto check_metric = [&](const auto& m, bool sphere) {
    for (int t = 0; t < 25; ++t) {
      const int chart = 0;
      const V2<double> x = random_base(sphere);
      const V2<double> y = random_dir();
      const double F = finsler_norm(m, chart, x, y);
      for (double lam : {0.5, 2.0, 7.0}) {
        const V2<double> ly = {lam * y[0], lam * y[1]};
        CHECK(finsler_norm(m, chart, x, ly) == doctest::Approx(lam * F).epsilon(1e-10));
        const auto g = fundamental_tensor(m, chart, x, y);
        const auto gl = fundamental_tensor(m, chart, x, ly);
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j)
            CHECK(gl[i][j] == doctest::Approx(g[i][j]).scale(1.0).epsilon(1e-9));
        const auto A = cartan_tensor(m, chart, x, y);
        const auto Al = cartan_tensor(m, chart, x, ly);
        CHECK(Al[0][0][0] == doctest::Approx(A[0][0][0]).scale(1.0).epsilon(1e-8));
      }
      // g_{ij} y^i y^j = F^2
      const auto g = fundamental_tensor(m, chart, x, y);
      CHECK(dot_g(g, y, y) == doctest::Approx(F * F).epsilon(1e-10));
      CHECK(det2(g) > 0.0);
      // spray homogeneity G(x, 2y) = 4 G(x, y)
      const V2<double> G1 = spray(m, chart, x, y);
      const V2<double> y2 = {2 * y[0], 2 * y[1]};
      const V2<double> G2 = spray(m, chart, x, y2);
      CHECK(G2[0] == doctest::Approx(4 * G1[0]).scale(1.0 + std::abs(G1[0])).epsilon(1e-9));
      CHECK(G2[1] == doctest::Approx(4 * G1[1]).scale(1.0 + std::abs(G1[1])).epsilon(1e-9));
    }
  };
  check_metric(RoundSphere{}, true);
  check_metric(FlatTorus{}, false);
  check_metric(RandersTorus{0.2, 0.1}, false);
  check_metric(ZermeloSphere{0.3}, true);
  check_metric(QuarticTorus{0.2}, false);
}

TEST_CASE("Cartan tensor: Riemannian vanishing, y-contraction, FD oracle") {
  RoundSphere sph;
  for (int t = 0; t < 10; ++t) {
    const auto A = cartan_tensor(sph, 0, random_base(true), random_dir());
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k) CHECK(std::abs(A[i][j][k]) < 1e-12);
  }

  RandersTorus m{0.3, 0.0};
  const V2<double> x = {0.7, 1.1};
  for (int t = 0; t < 10; ++t) {
    const V2<double> y = random_dir();
    const double F = finsler_norm(m, 0, x, y);
    const auto A = cartan_tensor(m, 0, x, y);
    // total symmetry and A_{ijk} y^k = 0
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        CHECK(A[i][j][0] == doctest::Approx(A[j][i][0]).epsilon(1e-12));
        CHECK(std::abs(A[i][j][0] * y[0] + A[i][j][1] * y[1]) < 1e-9);
      }
    // third-order finite differences
    for (int i = 0; i < 2; ++i)
      CHECK(A[i][0][1] ==
            doctest::Approx(0.25 * F * fd_third_F2(m, 0, x, y, i, 0, 1)).scale(1.0).epsilon(2e-5));
  }
}

TEST_CASE("spray: flat cases vanish, round sphere matches Christoffel oracle") {
  for (int t = 0; t < 10; ++t) {
    const V2<double> x = random_base(false);
    const V2<double> y = random_dir();
    V2<double> G;
    M2<double> N;
    spray_and_nonlinear(FlatTorus{}, 0, x, y, G, N);
    CHECK(std::abs(G[0]) + std::abs(G[1]) < 1e-13);
    CHECK(std::abs(N[0][0]) + std::abs(N[0][1]) + std::abs(N[1][0]) + std::abs(N[1][1]) < 1e-12);
    spray_and_nonlinear(QuarticTorus{0.2}, 0, x, y, G, N);
    CHECK(std::abs(G[0]) + std::abs(G[1]) < 1e-12);
  }

  RoundSphere sph;
  for (int t = 0; t < 20; ++t) {
    const V2<double> x = random_base(true);
    const V2<double> y = random_dir();
    const V2<double> G = spray(sph, 0, x, y);
    double gamma[2][2][2];
    sphere_christoffel(x, gamma);
    for (int i = 0; i < 2; ++i) {
      double expect = 0.0;
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k) expect += 0.5 * gamma[i][j][k] * y[size_t(j)] * y[size_t(k)];
      CHECK(G[i] == doctest::Approx(expect).scale(1.0 + std::abs(expect)).epsilon(1e-10));
    }
  }
}

TEST_CASE("orthonormal frame: defining properties across the zoo") {
  auto check_metric = [&](const auto& m, bool sphere) {
    for (int t = 0; t < 200; ++t) {
      const int chart = int(rng() % uint32_t(m.charts()));
      const V2<double> x = random_base(sphere);
      const double th = uni(0.0, 2 * M_PI);
      const auto fr = orthonormal_frame(m, chart, x, th);

      // unit tautological section
      CHECK(finsler_norm(m, chart, x, fr.y) == doctest::Approx(1.0).epsilon(1e-12));

      // g(e_i, e_j) = delta
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
          const V2<double> ei = {fr.E[0][i], fr.E[1][i]};
          const V2<double> ej = {fr.E[0][j], fr.E[1][j]};
          CHECK(dot_g(fr.g, ei, ej) ==
                doctest::Approx(i == j ? 1.0 : 0.0).scale(1.0).epsilon(1e-10));
        }

      // frame components of the Cartan tensor with an ell slot vanish
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) CHECK(std::abs(fr.Af[1][i][j]) < 1e-10);

      // positive fiber volume form
      const V2<double> yp = dy_dtheta(m, chart, x, th);
      const V2<double> e1 = {fr.E[0][0], fr.E[1][0]};
      CHECK(-dot_g(fr.g, yp, e1) > 0.0);
    }
  };
  check_metric(RoundSphere{}, true);
  check_metric(FlatTorus{}, false);
  check_metric(RandersTorus{0.2, 0.1}, false);
  check_metric(ZermeloSphere{0.3}, true);
  check_metric(QuarticTorus{0.2}, false);
}

TEST_CASE("orthonormal frame: Euclidean closed form and fiber orientation continuity") {
  FlatTorus flat;
  const V2<double> x = {1.0, 1.0};
  for (double th : {0.1, 1.0, 2.5, 4.0, 6.0}) {
    const auto fr = orthonormal_frame(flat, 0, x, th);
    CHECK(fr.E[0][1] == doctest::Approx(std::cos(th)).epsilon(1e-14));
    CHECK(fr.E[1][1] == doctest::Approx(std::sin(th)).epsilon(1e-14));
    // e1 = (sin, -cos): unit, orthogonal, oriented with positive fiber form
    CHECK(fr.E[0][0] == doctest::Approx(std::sin(th)).epsilon(1e-12));
    CHECK(fr.E[1][0] == doctest::Approx(-std::cos(th)).epsilon(1e-12));
  }

  // determinant sign fixed along a dense fiber loop (orientation continuity)
  RandersTorus rm{0.2, 0.1};
  const V2<double> xx = {0.9, 2.2};
  double prev = 0.0;
  for (int k = 0; k <= 720; ++k) {
    const double th = 2 * M_PI * k / 720.0;
    const auto fr = orthonormal_frame(rm, 0, xx, th);
    const double d = det2(fr.E);
    CHECK(d > 0.0);
    if (k > 0) CHECK(std::abs(d - prev) < 0.05);  // no jumps
    prev = d;
  }
}

TEST_CASE("Zermelo metric: navigation identity and chart consistency") {
  ZermeloSphere m{0.3};
  for (int t = 0; t < 30; ++t) {
    const int chart = int(rng() % 2);
    const V2<double> x = random_base(true);
    const V2<double> y = random_dir();
    const double F = finsler_norm(m, chart, x, y);
    // unit vectors are wind-shifted h-unit vectors: |y/F - W|_h = 1
    const V2<double> w = m.wind_at(chart, x);
    const V2<double> u = {y[0] / F - w[0], y[1] / F - w[1]};
    const double lam = sphere_conformal(x);
    CHECK(lam * (u[0] * u[0] + u[1] * u[1]) == doctest::Approx(1.0).epsilon(1e-12));
  }

  // F agrees across the chart transition (pushforward via jets)
  for (int t = 0; t < 20; ++t) {
    const double r = uni(0.4, 1.6), phi = uni(0.0, 2 * M_PI);
    const V2<double> x = {r * std::cos(phi), r * std::sin(phi)};
    const V2<double> y = random_dir();
    using J = Jet<double, 2>;
    V2<J> xj = {J(x[0]), J(x[1])};
    xj[0].d[0] = 1.0;
    xj[1].d[1] = 1.0;
    const V2<J> vj = sphere_chart_transition(xj);
    const V2<double> v = {vj[0].a, vj[1].a};
    const V2<double> pushed = {vj[0].d[0] * y[0] + vj[0].d[1] * y[1],
                               vj[1].d[0] * y[0] + vj[1].d[1] * y[1]};
    RoundSphere rs;
    CHECK(finsler_norm(rs, 0, x, y) ==
          doctest::Approx(finsler_norm(rs, 1, v, pushed)).epsilon(1e-11));
    CHECK(finsler_norm(m, 0, x, y) ==
          doctest::Approx(finsler_norm(m, 1, v, pushed)).epsilon(1e-11));
  }
}

TEST_CASE("fiber volume: Riemannian value, refined oracle, chart-rotation invariance") {
  // Riemannian: V = 2 pi to 1e-8
  RoundSphere sph;
  const V2<double> xs = {0.3, -0.5};
  CHECK(std::abs(fiber_volume(sph, 0, xs, 48) - 2 * M_PI) < 1e-8);
  CHECK(std::abs(fiber_volume(FlatTorus{}, 0, V2<double>{1.0, 2.0}, 48) - 2 * M_PI) < 1e-8);

  // Randers: matches the 10x-node arc-length quadrature of the indicatrix
  RandersTorus rm{0.2, 0.1};
  for (int t = 0; t < 5; ++t) {
    const V2<double> x = random_base(false);
    const double V = fiber_volume(rm, 0, x, 48);
    const double Vref = arclength_volume(rm, 0, x, 480);
    CHECK(std::abs(V - Vref) / Vref < 1e-6);
  }

  // invariance under fiber-chart rotation theta -> theta + c
  const V2<double> x0 = {2.0, 0.8};
  const double Va = arclength_volume(rm, 0, x0, 64, 0.0);
  const double Vb = arclength_volume(rm, 0, x0, 64, 0.77);
  CHECK(std::abs(Va - Vb) / Va < 1e-10);

  // quartic Minkowski norm: V differs from 2 pi but is x-independent
  QuarticTorus qm{0.2};
  const double Vq1 = fiber_volume(qm, 0, V2<double>{0.5, 0.5}, 64);
  const double Vq2 = fiber_volume(qm, 0, V2<double>{3.0, 1.0}, 64);
  CHECK(std::abs(Vq1 - Vq2) < 1e-12);
  CHECK(std::abs(Vq1 - 2 * M_PI) > 1e-3);
}

TEST_CASE("fiber volume: frame-only integrand equals the connection-form route") {
  // metric compatibility collapses w^2_1(d_theta) to -g(y', e_1); both code
  // paths must agree to rounding at every node of the zoo
  auto sweep = [&](const auto& m, bool sphere) {
    for (int t = 0; t < 6; ++t) {
      const int chart = int(rng() % uint32_t(m.charts()));
      const V2<double> x = random_base(sphere);
      const double th = uni(0.0, 2 * M_PI);
      ConnectionRequest req{Flavor::cartan, 1.0, nullptr};
      const auto cf = connection_at(m, req, chart, x, th);
      const double slow = cf.w[1][0][2];
      const double fast = fiber_speed(m, chart, x, th);
      CHECK(fast == doctest::Approx(slow).epsilon(1e-11));

      const double Vs = fiber_volume(m, chart, x, 32);
      const double Vf = fiber_volume_fast(m, chart, x, 32);
      CHECK(Vf == doctest::Approx(Vs).epsilon(1e-12));

      const auto [V1, dl1] = fiber_volume_with_dlog(m, chart, x, 32);
      const auto [V2q, dl2] = fiber_volume_with_dlog_fast(m, chart, x, 32);
      CHECK(V1 == doctest::Approx(V2q).epsilon(1e-12));
      CHECK(std::abs(dl1[0] - dl2[0]) < 1e-10);
      CHECK(std::abs(dl1[1] - dl2[1]) < 1e-10);
    }
  };
  sweep(RoundSphere{}, true);
  sweep(RandersTorus{0.2, 0.1}, false);
  sweep(ZermeloSphere{0.3}, true);
  sweep(QuarticTorus{0.2}, false);
}

TEST_CASE("d log V: zero for Riemannian and Minkowski, FD oracle for Randers") {
  const auto z1 = dlog_fiber_volume(RoundSphere{}, 0, V2<double>{0.4, 0.2}, 48);
  CHECK(std::abs(z1[0]) < 1e-10);
  CHECK(std::abs(z1[1]) < 1e-10);
  const auto z2 = dlog_fiber_volume(QuarticTorus{0.2}, 0, V2<double>{1.0, 2.0}, 48);
  CHECK(std::abs(z2[0]) < 1e-10);
  CHECK(std::abs(z2[1]) < 1e-10);

  RandersTorus rm{0.2, 0.1};
  const V2<double> x = {1.3, 0.4};
  const auto dl = dlog_fiber_volume(rm, 0, x, 48);
  // Richardson-extrapolated central differences of log V
  for (int i = 0; i < 2; ++i) {
    auto lv = [&](double d) {
      V2<double> xx = x;
      xx[size_t(i)] += d;
      return std::log(fiber_volume(rm, 0, xx, 48));
    };
    const double h = 1e-3;
    const double d1 = (lv(h) - lv(-h)) / (2 * h);
    const double d2 = (lv(h / 2) - lv(-h / 2)) / h;
    const double fd = (4 * d2 - d1) / 3;
    CHECK(dl[size_t(i)] == doctest::Approx(fd).scale(1.0 + std::abs(fd)).epsilon(1e-5));
  }
  // genuinely nonzero along x1 for the varying Randers coefficient
  CHECK(std::abs(dl[0]) > 1e-4);
}

TEST_CASE("metric registry resolves names and validates parameters") {
  CHECK_NOTHROW(make_metric("round_sphere", {}));
  CHECK_THROWS_AS(make_metric("randers_torus", {{"b0", 0.9}, {"b1", 0.2}}), std::invalid_argument);
  CHECK_THROWS_AS(make_metric("no_such_metric", {}), std::invalid_argument);
  CHECK(metric_zoo_names().size() == 5);
}
