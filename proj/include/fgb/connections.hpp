#pragma once

#include "fgb/geometry.hpp"

// Connection 1-forms on SM in the adapted orthonormal frame. Matrix
// convention: nabla e_j = w^i_j (x) e_i, i.e. w[i][j] acts on frame-component
// columns. The displayed structure systems then read
//   Chern:   d omega^i - omega^j ^ w^i_j = 0,
//            w^i_j + w^j_i + 2 A^j_{i a} w^a_n = 0,
//   Cartan:  d omega^i - omega^j ^ w^i_j = -A^i_{j a} omega^j ^ w^a_n,
//            w^i_j + w^j_i = 0,
// and the two flavors share the n-column, w^i_n = wbar^i_n.
// The SM cobasis order is (dx1, dx2, dtheta).
namespace fgb {

enum class Flavor { cartan, chern, family };

// skew-valued perturbation 1-form B of a metric-compatible family
// D_s = nabla + (1-s) B; smooth, bounded, with mixed dx/dtheta legs
struct Perturbation {
  double c = 0.1;

  template <class S>
  void eval(int /*chart*/, const V2<S>& x, const S& theta, S B12[3]) const {
    const S f = (1.0 + 0.5 * sin(x[0]) * cos(theta)) * c;
    B12[0] = f * 0.6;
    B12[1] = f * 0.3;
    B12[2] = f * 0.5;
  }
};

struct ConnectionRequest {
  Flavor flavor = Flavor::cartan;
  double s = 1.0;                       // family parameter, 1 = Cartan endpoint
  const Perturbation* pert = nullptr;   // required for Flavor::family
};

template <class S>
struct ConnCoeffs {
  S w[2][2][3];      // connection 1-forms over (dx1, dx2, dtheta)
  S omega[2][3];     // solder coframe omega^i (no dtheta leg)
  FrameData<S> fr;   // frame data reused downstream
};

// Chern connection coefficients in natural coordinates from delta-derivatives
// of g: Gamma^l_{jk} = 1/2 g^{ls}(delta_k g_{sj} + delta_j g_{sk} - delta_s g_{jk}),
// delta_k = d/dx^k - N^m_k d/dy^m.
template <class M, class S>
void chern_gamma(const M& m, int chart, const V2<S>& x, const V2<S>& y, S Gamma[2][2][2]) {
  using J = Jet<S, 4>;  // slots: x1 x2 y1 y2
  V2<J> X, Y;
  for (int i = 0; i < 2; ++i) {
    X[i] = J(x[i]);
    X[i].d[i] = S(1.0);
    Y[i] = J(y[i]);
    Y[i].d[2 + i] = S(1.0);
  }
  const M2<J> gj = fundamental_tensor(m, chart, X, Y);

  V2<S> G;
  M2<S> N;
  spray_and_nonlinear(m, chart, x, y, G, N);

  S delta_g[2][2][2];  // delta_k g_{ij}
  for (int k = 0; k < 2; ++k)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        delta_g[k][i][j] =
            gj[i][j].d[k] - N[0][k] * gj[i][j].d[2] - N[1][k] * gj[i][j].d[3];

  M2<S> g;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) g[i][j] = gj[i][j].a;
  const M2<S> ginv = inv2(g);

  for (int l = 0; l < 2; ++l)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) {
        S acc = S(0.0);
        for (int s = 0; s < 2; ++s)
          acc += ginv[l][s] * (delta_g[k][s][j] + delta_g[j][s][k] - delta_g[s][j][k]);
        Gamma[l][j][k] = 0.5 * acc;
      }
}

template <class M, class S>
ConnCoeffs<S> connection_at(const M& m, const ConnectionRequest& req, int chart, const V2<S>& x,
                            const S& theta) {
  ConnCoeffs<S> out;

  // frame with chart-coordinate derivatives in one jet pass
  using J = Jet<S, 3>;
  V2<J> Xj = {J(x[0]), J(x[1])};
  Xj[0].d[0] = S(1.0);
  Xj[1].d[1] = S(1.0);
  J Th(theta);
  Th.d[2] = S(1.0);
  const FrameData<J> frj = orthonormal_frame(m, chart, Xj, Th);

  // strip jets for the value-level frame copy
  for (int a = 0; a < 2; ++a) {
    out.fr.y[a] = frj.y[a].a;
    for (int b = 0; b < 2; ++b) {
      out.fr.g[a][b] = frj.g[a][b].a;
      out.fr.E[a][b] = frj.E[a][b].a;
      out.fr.Einv[a][b] = frj.Einv[a][b].a;
      for (int ccc = 0; ccc < 2; ++ccc) {
        out.fr.A[a][b][ccc] = frj.A[a][b][ccc].a;
        out.fr.Af[a][b][ccc] = frj.Af[a][b][ccc].a;
      }
    }
  }

  S Gamma[2][2][2];
  chern_gamma(m, chart, x, out.fr.y, Gamma);

  // wbar = E^{-1} dE + E^{-1} W E with W^i_j = Gamma^i_{jk} dx^k
  S wbar[2][2][3];
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int mm = 0; mm < 3; ++mm) {
        S acc = S(0.0);
        for (int p = 0; p < 2; ++p) acc += out.fr.Einv[i][p] * frj.E[p][j].d[mm];
        if (mm < 2) {
          for (int p = 0; p < 2; ++p)
            for (int q = 0; q < 2; ++q)
              acc += out.fr.Einv[i][p] * Gamma[p][q][mm] * out.fr.E[q][j];
        }
        wbar[i][j][mm] = acc;
      }

  for (int i = 0; i < 2; ++i) {
    for (int mm = 0; mm < 3; ++mm) out.omega[i][mm] = (mm < 2) ? out.fr.Einv[i][mm] : S(0.0);
  }

  if (req.flavor == Flavor::chern) {
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int mm = 0; mm < 3; ++mm) out.w[i][j][mm] = wbar[i][j][mm];
    return out;
  }

  // Cartan: w^j_i = wbar^j_i + A^j_{i a} wbar^a_n, then exact skew storage
  S cart[2][2][3];
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int mm = 0; mm < 3; ++mm)
        cart[i][j][mm] = wbar[i][j][mm] + out.fr.Af[i][j][0] * wbar[0][1][mm];
  for (int mm = 0; mm < 3; ++mm) {
    const S off = 0.5 * (cart[1][0][mm] - cart[0][1][mm]);
    out.w[1][0][mm] = off;
    out.w[0][1][mm] = -off;
    out.w[0][0][mm] = S(0.0);
    out.w[1][1][mm] = S(0.0);
  }

  if (req.flavor == Flavor::family) {
    if (!req.pert) throw std::invalid_argument("family flavor needs a perturbation");
    S B12[3];
    req.pert->eval(chart, x, theta, B12);
    const double f = 1.0 - req.s;
    for (int mm = 0; mm < 3; ++mm) {
      out.w[0][1][mm] += f * B12[mm];
      out.w[1][0][mm] -= f * B12[mm];
    }
  }
  return out;
}

// pre-projection antisymmetry defect of the Cartan relation; a direct probe
// of the coordinate-route Gamma (the projected forms are exactly skew)
template <class M, class S>
double cartan_asymmetry_defect(const M& m, int chart, const V2<S>& x, const S& theta) {
  ConnectionRequest req{Flavor::chern, 1.0, nullptr};
  const ConnCoeffs<S> cf = connection_at(m, req, chart, x, theta);
  double r = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int mm = 0; mm < 3; ++mm) {
        // cart^i_j + cart^j_i with cart = wbar + A-correction
        const double v = value_of(cf.w[i][j][mm] + cf.fr.Af[i][j][0] * cf.w[0][1][mm] +
                                  cf.w[j][i][mm] + cf.fr.Af[j][i][0] * cf.w[0][1][mm]);
        r = std::max(r, std::abs(v));
      }
  return r;
}

// metric-compatible family D_s = cartan + (1-s) B
template <class M, class S>
ConnCoeffs<S> family_at(const M& m, const Perturbation& pert, double s, int chart, const V2<S>& x,
                        const S& theta) {
  ConnectionRequest req{Flavor::family, s, &pert};
  return connection_at(m, req, chart, x, theta);
}

// ---------------------------------------------------------------------------
// fiber volume V(x) = int_{S_xM} dV, dV(d_theta) = w^n_1(d_theta) of the
// Cartan (equivalently Chern) connection; periodic trapezoid in theta

// dV(d_theta) without the Christoffel tower: metric compatibility reduces
// w^n_1(d_theta) to -g(dy/dtheta, e_1). Kept equivalent to the connection
// route by a dedicated unit test.
template <class M, class S>
S fiber_speed(const M& m, int chart, const V2<S>& x, const S& theta) {
  const V2<S> y = y_of_theta(m, chart, x, theta);
  const M2<S> g = fundamental_tensor(m, chart, x, y);
  const V2<S> gl = {g[0][0] * y[0] + g[0][1] * y[1], g[1][0] * y[0] + g[1][1] * y[1]};
  const int pick = (std::abs(value_of(gl[0])) <= std::abs(value_of(gl[1]))) ? 0 : 1;
  V2<S> u = {S(0.0), S(0.0)};
  u[pick] = S(1.0);
  u[0] = u[0] - gl[pick] * y[0];
  u[1] = u[1] - gl[pick] * y[1];
  const S nu = sqrt(dot_g(g, u, u));
  V2<S> e1 = {u[0] / nu, u[1] / nu};
  const V2<S> yp = dy_dtheta(m, chart, x, theta);
  S s = -dot_g(g, yp, e1);
  if (value_of(s) < 0.0) s = -s;  // orientation flip of e_1
  return s;
}

template <class M, class S>
S fiber_volume_fast(const M& m, int chart, const V2<S>& x, int nodes) {
  if (nodes < 4) throw std::invalid_argument("fiber quadrature needs >= 4 nodes");
  const double step = 2.0 * M_PI / nodes;
  S acc = S(0.0);
  for (int k = 0; k < nodes; ++k) {
    const S integrand = fiber_speed(m, chart, x, S(step * k));
    if (value_of(integrand) <= 0.0)
      throw std::runtime_error("fiber volume integrand not positive: orientation defect");
    acc += integrand;
  }
  return acc * step;
}

template <class M>
std::pair<double, V2<double>> fiber_volume_with_dlog_fast(const M& m, int chart,
                                                          const V2<double>& x, int nodes) {
  using J = Jet<double, 2>;
  V2<J> Xj = {J(x[0]), J(x[1])};
  Xj[0].d[0] = 1.0;
  Xj[1].d[1] = 1.0;
  const J V = fiber_volume_fast(m, chart, Xj, nodes);
  return {V.a, {V.d[0] / V.a, V.d[1] / V.a}};
}

template <class M, class S>
S fiber_volume(const M& m, int chart, const V2<S>& x, int nodes) {
  if (nodes < 4) throw std::invalid_argument("fiber quadrature needs >= 4 nodes");
  ConnectionRequest req{Flavor::cartan, 1.0, nullptr};
  const double step = 2.0 * M_PI / nodes;
  S acc = S(0.0);
  for (int k = 0; k < nodes; ++k) {
    const S th = S(step * k);
    const ConnCoeffs<S> cf = connection_at(m, req, chart, x, th);
    const S integrand = cf.w[1][0][2];
    if (value_of(integrand) <= 0.0)
      throw std::runtime_error("fiber volume integrand not positive: orientation defect");
    acc += integrand;
  }
  return acc * step;
}

// d log V as a base 1-form (components along dx^1, dx^2)
template <class M>
V2<double> dlog_fiber_volume(const M& m, int chart, const V2<double>& x, int nodes) {
  using J = Jet<double, 2>;
  V2<J> Xj = {J(x[0]), J(x[1])};
  Xj[0].d[0] = 1.0;
  Xj[1].d[1] = 1.0;
  const J V = fiber_volume(m, chart, Xj, nodes);
  return {V.d[0] / V.a, V.d[1] / V.a};
}

template <class M>
std::pair<double, V2<double>> fiber_volume_with_dlog(const M& m, int chart, const V2<double>& x,
                                                     int nodes) {
  using J = Jet<double, 2>;
  V2<J> Xj = {J(x[0]), J(x[1])};
  Xj[0].d[0] = 1.0;
  Xj[1].d[1] = 1.0;
  const J V = fiber_volume(m, chart, Xj, nodes);
  return {V.a, {V.d[0] / V.a, V.d[1] / V.a}};
}

}  // namespace fgb
