#pragma once

#include <cmath>
#include <stdexcept>

#include "fgb/metrics.hpp"

// Pointwise Finsler data on the sphere bundle of a surface: fundamental
// tensor, Cartan tensor, spray and nonlinear connection, adapted orthonormal
// frames. Everything is scalar-generic so outer derivative passes can seed
// chart coordinates with jets.
namespace fgb {

// point of SM in a chart: base coordinates plus the fiber angle
struct SpherePoint {
  int chart = 0;
  std::array<double, 2> x{};
  double theta = 0.0;
};

template <class S>
S det2(const M2<S>& m) {
  return m[0][0] * m[1][1] - m[0][1] * m[1][0];
}

template <class S>
M2<S> inv2(const M2<S>& m) {
  const S d = det2(m);
  return {{{m[1][1] / d, (-m[0][1]) / d}, {(-m[1][0]) / d, m[0][0] / d}}};
}

template <class S>
S dot_g(const M2<S>& g, const V2<S>& u, const V2<S>& v) {
  return g[0][0] * u[0] * v[0] + g[0][1] * u[0] * v[1] + g[1][0] * u[1] * v[0] +
         g[1][1] * u[1] * v[1];
}

template <class M, class S>
S finsler_norm(const M& m, int chart, const V2<S>& x, const V2<S>& y) {
  return sqrt(m.F2(chart, x, y));
}

// g_ij = 1/2 d^2 F^2 / dy^i dy^j, one nested-jet pass for the full Hessian
template <class M, class S>
M2<S> fundamental_tensor(const M& m, int chart, const V2<S>& x, const V2<S>& y) {
  using J = Jet<S, 2>;
  using JJ = Jet<J, 2>;
  V2<JJ> X, Y;
  for (int i = 0; i < 2; ++i) {
    X[i] = JJ(J(x[i]));
    Y[i] = JJ(J(y[i]));
    Y[i].a.d[i] = S(1.0);
    Y[i].d[i].a = S(1.0);
  }
  const JJ f2 = m.F2(chart, X, Y);
  M2<S> g;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) g[i][j] = 0.5 * f2.d[i].d[j];
  return g;
}

// A_ijk = (F/4) d^3 F^2 / dy^i dy^j dy^k, totally symmetric
template <class M, class S>
std::array<M2<S>, 2> cartan_tensor(const M& m, int chart, const V2<S>& x, const V2<S>& y) {
  using J1 = Jet<S, 2>;
  using J2 = Jet<J1, 2>;
  using J3 = Jet<J2, 2>;
  V2<J3> X, Y;
  for (int i = 0; i < 2; ++i) {
    X[i] = J3(J2(J1(x[i])));
    Y[i] = J3(J2(J1(y[i])));
    Y[i].a.a.d[i] = S(1.0);
    Y[i].a.d[i].a = S(1.0);
    Y[i].d[i].a.a = S(1.0);
  }
  const J3 f2 = m.F2(chart, X, Y);
  const S F = finsler_norm(m, chart, x, y);
  std::array<M2<S>, 2> A;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) A[i][j][k] = 0.25 * F * f2.d[i].d[j].d[k];
  return A;
}

// geodesic spray G^l = 1/4 g^{lm} (y^k d^2F^2/dx^k dy^m - dF^2/dx^m)
template <class M, class S>
V2<S> spray(const M& m, int chart, const V2<S>& x, const V2<S>& y) {
  using J = Jet<S, 2>;
  using JJ = Jet<J, 2>;  // inner: y slots, outer: x slots
  V2<JJ> X, Y;
  for (int i = 0; i < 2; ++i) {
    X[i] = JJ(J(x[i]));
    X[i].d[i].a = S(1.0);
    Y[i] = JJ(J(y[i]));
    Y[i].a.d[i] = S(1.0);
  }
  const JJ f2 = m.F2(chart, X, Y);
  const M2<S> ginv = inv2(fundamental_tensor(m, chart, x, y));
  V2<S> rhs;
  for (int mm = 0; mm < 2; ++mm) {
    S acc = S(0.0);
    for (int k = 0; k < 2; ++k) acc += y[k] * f2.d[k].d[mm];
    rhs[mm] = acc - f2.d[mm].a;
  }
  V2<S> G;
  for (int l = 0; l < 2; ++l) G[l] = 0.25 * (ginv[l][0] * rhs[0] + ginv[l][1] * rhs[1]);
  return G;
}

// nonlinear connection N^i_j = dG^i/dy^j together with G itself
template <class M, class S>
void spray_and_nonlinear(const M& m, int chart, const V2<S>& x, const V2<S>& y, V2<S>& G,
                         M2<S>& N) {
  using J = Jet<S, 2>;
  V2<J> X, Y;
  for (int i = 0; i < 2; ++i) {
    X[i] = J(x[i]);
    Y[i] = J(y[i]);
    Y[i].d[i] = S(1.0);
  }
  const V2<J> Gj = spray(m, chart, X, Y);
  for (int i = 0; i < 2; ++i) {
    G[i] = Gj[i].a;
    for (int j = 0; j < 2; ++j) N[i][j] = Gj[i].d[j];
  }
}

// unit-speed representative of the fiber angle: y(theta) = (cos,sin)/F
template <class M, class S>
V2<S> y_of_theta(const M& m, int chart, const V2<S>& x, const S& theta) {
  const V2<S> dir = {cos(theta), sin(theta)};
  const S F = finsler_norm(m, chart, x, dir);
  return {dir[0] / F, dir[1] / F};
}

template <class M, class S>
V2<S> dy_dtheta(const M& m, int chart, const V2<S>& x, const S& theta) {
  using J = Jet<S, 1>;
  V2<J> X = {J(x[0]), J(x[1])};
  J th(theta);
  th.d[0] = S(1.0);
  const V2<J> yj = y_of_theta(m, chart, X, th);
  return {yj[0].d[0], yj[1].d[0]};
}

// Adapted oriented orthonormal frame of the pulled-back bundle: e_2 = ell,
// e_1 the g-unit normal, signed so the fiber volume form is positive.
template <class S>
struct FrameData {
  V2<S> y;                   // = ell (F = 1 on SM)
  M2<S> g;                   // fundamental tensor at (x, y)
  std::array<M2<S>, 2> A;    // Cartan tensor, natural indices
  M2<S> E;                   // E[m][i]: component m of frame vector e_i
  M2<S> Einv;                // coframe rows: omega^i = Einv[i][m] dx^m
  std::array<M2<S>, 2> Af;   // Cartan tensor in the frame
};

template <class M, class S>
FrameData<S> orthonormal_frame(const M& m, int chart, const V2<S>& x, const S& theta) {
  FrameData<S> fr;
  fr.y = y_of_theta(m, chart, x, theta);
  fr.g = fundamental_tensor(m, chart, x, fr.y);
  fr.A = cartan_tensor(m, chart, x, fr.y);

  // Gram-Schmidt against ell over the coordinate vectors, skipping the one
  // with the larger |g(d_i, ell)| (n = 2: keep the smaller).
  const V2<S> gl = {fr.g[0][0] * fr.y[0] + fr.g[0][1] * fr.y[1],
                    fr.g[1][0] * fr.y[0] + fr.g[1][1] * fr.y[1]};
  const int pick = (std::abs(value_of(gl[0])) <= std::abs(value_of(gl[1]))) ? 0 : 1;
  V2<S> u = {S(0.0), S(0.0)};
  u[pick] = S(1.0);
  u[0] = u[0] - gl[pick] * fr.y[0];
  u[1] = u[1] - gl[pick] * fr.y[1];
  const S nu = sqrt(dot_g(fr.g, u, u));
  V2<S> e1 = {u[0] / nu, u[1] / nu};

  // orientation: require dV(d_theta) = -g(y'(theta), e1) > 0
  const V2<S> yp = dy_dtheta(m, chart, x, theta);
  if (value_of(dot_g(fr.g, yp, e1)) > 0.0) {
    e1[0] = -e1[0];
    e1[1] = -e1[1];
  }

  fr.E[0][0] = e1[0];
  fr.E[1][0] = e1[1];
  fr.E[0][1] = fr.y[0];
  fr.E[1][1] = fr.y[1];
  fr.Einv = inv2(fr.E);

  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) {
        S acc = S(0.0);
        for (int p = 0; p < 2; ++p)
          for (int q = 0; q < 2; ++q)
            for (int r = 0; r < 2; ++r)
              acc += fr.A[p][q][r] * fr.E[p][i] * fr.E[q][j] * fr.E[r][k];
        fr.Af[i][j][k] = acc;
      }
  return fr;
}

}  // namespace fgb
