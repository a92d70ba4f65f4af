#pragma once

#include <functional>

#include "fgb/connections.hpp"
#include "fgb/multivector.hpp"

// Exterior calculus on SM (dim 3 for n = 2) and the curvature apparatus.
// Multivector convention at a point: 3 form generators (dx1, dx2, dtheta) and
// 2 fiber generators (e_1, e_2) with e_2 = ell. 2-form coefficient arrays are
// ordered by pairs (01), (02), (12).
namespace fgb {

inline constexpr int kFormGen = 3;
inline constexpr int kFiberGen = 2;

template <class S>
S wedge_pair(const S a[3], const S b[3], int p) {
  switch (p) {
    case 0: return a[0] * b[1] - a[1] * b[0];
    case 1: return a[0] * b[2] - a[2] * b[0];
    default: return a[1] * b[2] - a[2] * b[1];
  }
}

template <class S>
Multivector<S> form1_to_mv(const S c[3]) {
  Multivector<S> r(kFormGen, kFiberGen);
  for (int m = 0; m < 3; ++m) r.add_term(1u << m, 0, Cplx<S>(c[m]));
  return r;
}

template <class S>
Multivector<S> form2_to_mv(const S c[3]) {
  Multivector<S> r(kFormGen, kFiberGen);
  r.add_term(0b011, 0, Cplx<S>(c[0]));
  r.add_term(0b101, 0, Cplx<S>(c[1]));
  r.add_term(0b110, 0, Cplx<S>(c[2]));
  return r;
}

// the distinguished section ell = e_n as a (0,1) element
template <class S>
Multivector<S> ell_mv() {
  Multivector<S> r(kFormGen, kFiberGen);
  r.add_term(0, 1u << (kFiberGen - 1), Cplx<S>(S(1.0)));
  return r;
}

// nabla ell = sum_a w^a_n (x) e_a as a (1,1) element
template <class S>
Multivector<S> nabla_ell_to_mv(const ConnCoeffs<S>& cf) {
  Multivector<S> r(kFormGen, kFiberGen);
  for (int m = 0; m < 3; ++m) r.add_term(1u << m, 1u << 0, Cplx<S>(cf.w[0][1][m]));
  return r;
}

template <class S>
struct CurvatureData {
  S Om[2][2][3];       // curvature 2-forms Om^i_j over the pair basis
  ConnCoeffs<S> conn;  // value-level connection at the point
};

template <class S>
ConnCoeffs<S> strip_conn(const ConnCoeffs<Jet<S, 3>>& cj) {
  ConnCoeffs<S> out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int m = 0; m < 3; ++m) out.w[i][j][m] = cj.w[i][j][m].a;
  for (int i = 0; i < 2; ++i)
    for (int m = 0; m < 3; ++m) out.omega[i][m] = cj.omega[i][m].a;
  for (int a = 0; a < 2; ++a) {
    out.fr.y[a] = cj.fr.y[a].a;
    for (int b = 0; b < 2; ++b) {
      out.fr.g[a][b] = cj.fr.g[a][b].a;
      out.fr.E[a][b] = cj.fr.E[a][b].a;
      out.fr.Einv[a][b] = cj.fr.Einv[a][b].a;
      for (int c = 0; c < 2; ++c) {
        out.fr.A[a][b][c] = cj.fr.A[a][b][c].a;
        out.fr.Af[a][b][c] = cj.fr.Af[a][b][c].a;
      }
    }
  }
  return out;
}

// exterior derivative of a 1-form from jet-carried coefficients
template <class S>
void d_of_form1(const Jet<S, 3> c[3], S out[3]) {
  out[0] = c[1].d[0] - c[0].d[1];
  out[1] = c[2].d[0] - c[0].d[2];
  out[2] = c[2].d[1] - c[1].d[2];
}

// curvature Om^i_j = d w^i_j - w^k_j ^ w^i_k of the requested flavor
template <class M, class S>
CurvatureData<S> curvature_at(const M& m, const ConnectionRequest& req, int chart, const V2<S>& x,
                              const S& theta) {
  using J = Jet<S, 3>;
  V2<J> Xj = {J(x[0]), J(x[1])};
  Xj[0].d[0] = S(1.0);
  Xj[1].d[1] = S(1.0);
  J Th(theta);
  Th.d[2] = S(1.0);
  const ConnCoeffs<J> cj = connection_at(m, req, chart, Xj, Th);

  CurvatureData<S> out;
  out.conn = strip_conn(cj);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      S dw[3];
      d_of_form1(cj.w[i][j], dw);
      for (int p = 0; p < 3; ++p) {
        S acc = dw[p];
        for (int k = 0; k < 2; ++k)
          acc = acc - wedge_pair(out.conn.w[k][j], out.conn.w[i][k], p);
        out.Om[i][j][p] = acc;
      }
    }
  return out;
}

// so-identification of the curvature: 1/2 sum Om^j_i (x) e_i ^ e_j
template <class S>
Multivector<S> curvature_to_mv(const CurvatureData<S>& cd) {
  Multivector<S> r(kFormGen, kFiberGen);
  const S* om = cd.Om[1][0];
  r.add_term(0b011, 0b11, Cplx<S>(om[0]));
  r.add_term(0b101, 0b11, Cplx<S>(om[1]));
  r.add_term(0b110, 0b11, Cplx<S>(om[2]));
  return r;
}

// Theta_t = t^2/2 + i t nabla ell + Omega
template <class S>
Multivector<S> theta_t(const CurvatureData<S>& cd, const Multivector<S>& nabla_ell, double t) {
  Multivector<S> r = curvature_to_mv(cd);
  for (const auto& [k, c] : nabla_ell.terms) r.terms[k] += times_i(c) * t;
  Multivector<S> half = mv_one<S>(kFormGen, kFiberGen) * (0.5 * t * t);
  return r + half;
}

// U_t = Berezin(exp(-Theta_t)), a (complex) n-form on SM
template <class M, class S>
Multivector<S> u_t(const M& m, const ConnectionRequest& req, int chart, const V2<S>& x,
                   const S& theta, double t) {
  const CurvatureData<S> cd = curvature_at(m, req, chart, x, theta);
  const Multivector<S> nl = nabla_ell_to_mv(cd.conn);
  return berezin(exp_even(-theta_t(cd, nl, t)));
}

// ---------------------------------------------------------------------------
// exterior derivative of multivector-valued fields
//
// A field is any callable f(chart, x, theta) -> Multivector<S> that accepts
// jet scalars; the derivative pass seeds all three chart coordinates at once.

template <class F>
MultivectorD field_value(const F& f, const SpherePoint& p) {
  const V2<double> x = {p.x[0], p.x[1]};
  return f(p.chart, x, p.theta);
}

// d applied to every coefficient: d(c dz^I (x) e_J) = sum_m d_m c dz^m ^ dz^I (x) e_J
template <class F>
MultivectorD ext_d(const F& f, const SpherePoint& p) {
  using J = Jet<double, 3>;
  V2<J> Xj = {J(p.x[0]), J(p.x[1])};
  Xj[0].d[0] = 1.0;
  Xj[1].d[1] = 1.0;
  J Th(p.theta);
  Th.d[2] = 1.0;
  const Multivector<J> mj = f(p.chart, Xj, Th);

  MultivectorD r(mj.n_form, mj.n_fiber);
  for (const auto& [k, c] : mj.terms) {
    const uint32_t fm = Multivector<J>::form_mask(k), bm = Multivector<J>::fiber_mask(k);
    for (int m = 0; m < 3; ++m) {
      const uint32_t bit = 1u << m;
      if (fm & bit) continue;
      const double sgn = merge_sign(bit, fm);
      r.add_term(fm | bit, bm, Cplx<double>(c.re.d[m] * sgn, c.im.d[m] * sgn));
    }
  }
  return r;
}

// value part of a jet-evaluated field (shares one evaluation with ext_d users)
template <class F>
std::pair<MultivectorD, MultivectorD> value_and_ext_d(const F& f, const SpherePoint& p) {
  using J = Jet<double, 3>;
  V2<J> Xj = {J(p.x[0]), J(p.x[1])};
  Xj[0].d[0] = 1.0;
  Xj[1].d[1] = 1.0;
  J Th(p.theta);
  Th.d[2] = 1.0;
  const Multivector<J> mj = f(p.chart, Xj, Th);

  MultivectorD val(mj.n_form, mj.n_fiber), dd(mj.n_form, mj.n_fiber);
  for (const auto& [k, c] : mj.terms) {
    const uint32_t fm = Multivector<J>::form_mask(k), bm = Multivector<J>::fiber_mask(k);
    val.add_term(fm, bm, Cplx<double>(c.re.a, c.im.a));
    for (int m = 0; m < 3; ++m) {
      const uint32_t bit = 1u << m;
      if (fm & bit) continue;
      const double sgn = merge_sign(bit, fm);
      dd.add_term(fm | bit, bm, Cplx<double>(c.re.d[m] * sgn, c.im.d[m] * sgn));
    }
  }
  return {val, dd};
}

// finite-difference exterior derivative (independent oracle and fallback):
// central differences with one Richardson level, h = 1e-5 by default
using FormFieldFn = std::function<MultivectorD(const SpherePoint&)>;

MultivectorD ext_d_fd(const FormFieldFn& f, const SpherePoint& p, double h = 1e-5,
                      bool richardson = true);

// ---------------------------------------------------------------------------
// covariant derivative on multivector fields:
//   nabla(a (x) b) = da (x) b + (-1)^{deg a} a ^ nabla b,
// with nabla e_k = sum_i w^i_k (x) e_i of the requested flavor.

// nabla of a bare fiber monomial (algebraic, at a point)
template <class S>
Multivector<S> nabla_fiber_monomial(const ConnCoeffs<S>& cf, uint32_t bm) {
  Multivector<S> r(kFormGen, kFiberGen);
  if (bm == 0) return r;
  const int k = std::countr_zero(bm);
  const uint32_t rest = bm & (bm - 1);

  Multivector<S> nek(kFormGen, kFiberGen);  // nabla e_k as (1,1) element
  for (int i = 0; i < 2; ++i)
    for (int m = 0; m < 3; ++m) nek.add_term(1u << m, 1u << i, Cplx<S>(cf.w[i][k][m]));

  Multivector<S> rest_mono(kFormGen, kFiberGen);
  rest_mono.add_term(0, rest, Cplx<S>(S(1.0)));
  r = mv_product(nek, rest_mono);

  if (rest != 0) {
    Multivector<S> ek(kFormGen, kFiberGen);
    ek.add_term(0, 1u << k, Cplx<S>(S(1.0)));
    // alpha = e_k has bidegree (0,1): nabla(alpha.beta) = (nabla alpha).beta - alpha.(nabla beta)
    r = r - mv_product(ek, nabla_fiber_monomial(cf, rest));
  }
  return r;
}

template <class M, class F>
MultivectorD nabla_on_A(const M& m, const ConnectionRequest& req, const F& f,
                        const SpherePoint& p) {
  auto [val, dd] = value_and_ext_d(f, p);
  const V2<double> x = {p.x[0], p.x[1]};
  const ConnCoeffs<double> cf = connection_at(m, req, p.chart, x, p.theta);

  MultivectorD r = dd;
  for (const auto& [k, c] : val.terms) {
    const uint32_t fm = MultivectorD::form_mask(k), bm = MultivectorD::fiber_mask(k);
    if (bm == 0) continue;
    MultivectorD nb = nabla_fiber_monomial(cf, bm);
    if (nb.empty()) continue;
    MultivectorD a(kFormGen, kFiberGen);
    const double sgn = (std::popcount(fm) & 1) ? -1.0 : 1.0;
    a.add_term(fm, 0, c * sgn);
    r = r + mv_product(a, nb);
  }
  return r;
}

// ---------------------------------------------------------------------------
// residuals of the structural identities (max-abs coefficient norms)

struct StructureResidual {
  double torsion = 0.0;  // displayed first equation of the flavor
  double metric = 0.0;   // displayed second equation of the flavor
};

// both structure equations of the requested flavor at a point
template <class M>
StructureResidual structure_residual(const M& m, const ConnectionRequest& req,
                                     const SpherePoint& p) {
  using J = Jet<double, 3>;
  V2<J> Xj = {J(p.x[0]), J(p.x[1])};
  Xj[0].d[0] = 1.0;
  Xj[1].d[1] = 1.0;
  J Th(p.theta);
  Th.d[2] = 1.0;
  const ConnCoeffs<J> cj = connection_at(m, req, p.chart, Xj, Th);
  const ConnCoeffs<double> cf = strip_conn(cj);

  StructureResidual out;
  for (int i = 0; i < 2; ++i) {
    double dom[3];
    d_of_form1(cj.omega[i], dom);
    for (int pr = 0; pr < 3; ++pr) {
      double acc = dom[pr];
      for (int j = 0; j < 2; ++j) acc -= wedge_pair(cf.omega[j], cf.w[i][j], pr);
      if (req.flavor != Flavor::chern) {
        // Cartan torsion: ... = -A^i_{j a} omega^j ^ w^a_n
        for (int j = 0; j < 2; ++j)
          acc += cf.fr.Af[i][j][0] * wedge_pair(cf.omega[j], cf.w[0][1], pr);
      }
      out.torsion = std::max(out.torsion, std::abs(acc));
    }
  }

  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int mm = 0; mm < 3; ++mm) {
        double v = value_of(cf.w[i][j][mm] + cf.w[j][i][mm]);
        if (req.flavor == Flavor::chern) v += 2.0 * cf.fr.Af[j][i][0] * cf.w[0][1][mm];
        out.metric = std::max(out.metric, std::abs(v));
      }
  return out;
}

// second Bianchi identity nabla Omega = 0 for the requested flavor
template <class M>
double bianchi_residual(const M& m, const ConnectionRequest& req, const SpherePoint& p) {
  auto omega_field = [&]<class S>(int chart, const V2<S>& x, const S& th) -> Multivector<S> {
    return curvature_to_mv(curvature_at(m, req, chart, x, th));
  };
  return max_abs_coeff(nabla_on_A(m, req, omega_field, p));
}

// Theta_t closure identity (nabla - i t iota(ell)) f(Theta_t) = 0
template <class M>
double prop32_residual(const M& m, const ConnectionRequest& req, const SpherePoint& p, double t,
                       const std::vector<double>& f_derivs) {
  auto q_field = [&]<class S>(int chart, const V2<S>& x, const S& th) -> Multivector<S> {
    const CurvatureData<S> cd = curvature_at(m, req, chart, x, th);
    const Multivector<S> nl = nabla_ell_to_mv(cd.conn);
    const Multivector<S> om = curvature_to_mv(cd);
    return f_of_theta(f_derivs, t, nl, om);
  };
  const MultivectorD nabla_q = nabla_on_A(m, req, q_field, p);
  const MultivectorD q = field_value(q_field, p);
  MultivectorD iota_q = contract(ell_mv<double>(), q);
  MultivectorD res = nabla_q;
  for (const auto& [k, c] : iota_q.terms) res.terms[k] -= times_i(c) * t;
  return max_abs_coeff(res);
}

// Berezin commutation d B(xi) = B(nabla xi)
template <class M, class F>
double eq32_residual(const M& m, const ConnectionRequest& req, const F& xi,
                     const SpherePoint& p) {
  auto bz = [&]<class S>(int chart, const V2<S>& x, const S& th) -> Multivector<S> {
    return berezin(xi(chart, x, th));
  };
  const MultivectorD lhs = ext_d(bz, p);
  const MultivectorD rhs = berezin(nabla_on_A(m, req, xi, p));
  return max_abs_diff(lhs, rhs);
}

// the two nontrivial identities of the ell-calculus:
// iota(ell) nabla ell = 0 and nabla(nabla ell) = iota(ell) Omega
struct EllResiduals {
  double iota_nabla_ell = 0.0;
  double nabla_nabla_ell = 0.0;
};

template <class M>
EllResiduals eq31_residuals(const M& m, const ConnectionRequest& req, const SpherePoint& p) {
  auto nl_field = [&]<class S>(int chart, const V2<S>& x, const S& th) -> Multivector<S> {
    ConnectionRequest r = req;
    return nabla_ell_to_mv(connection_at(m, r, chart, x, th));
  };
  EllResiduals out;
  const MultivectorD nl = field_value(nl_field, p);
  out.iota_nabla_ell = max_abs_coeff(contract(ell_mv<double>(), nl));

  const V2<double> x = {p.x[0], p.x[1]};
  const CurvatureData<double> cd = curvature_at(m, req, p.chart, x, p.theta);
  const MultivectorD lhs = nabla_on_A(m, req, nl_field, p);
  const MultivectorD rhs = contract(ell_mv<double>(), curvature_to_mv(cd));
  out.nabla_nabla_ell = max_abs_diff(lhs, rhs);
  return out;
}

// Lemma-style closure of U_t: || d U_t || at the point
template <class M>
double lemma33_residual(const M& m, const ConnectionRequest& req, const SpherePoint& p, double t) {
  auto u_field = [&]<class S>(int chart, const V2<S>& x, const S& th) -> Multivector<S> {
    return u_t(m, req, chart, x, th, t);
  };
  return max_abs_coeff(ext_d(u_field, p));
}

// transgression identity d/dt U_t = -i d[B(ell . e^{-Theta_t})]
template <class M>
double lemma34_residual(const M& m, const ConnectionRequest& req, const SpherePoint& p, double t,
                        double dt = 1e-3) {
  const V2<double> x = {p.x[0], p.x[1]};
  const MultivectorD up = u_t(m, req, p.chart, x, p.theta, t + dt);
  const MultivectorD um = u_t(m, req, p.chart, x, p.theta, t - dt);
  const MultivectorD dudt = (up - um) * (0.5 / dt);

  auto b_field = [&]<class S>(int chart, const V2<S>& xx, const S& th) -> Multivector<S> {
    const CurvatureData<S> cd = curvature_at(m, req, chart, xx, th);
    const Multivector<S> nl = nabla_ell_to_mv(cd.conn);
    const Multivector<S> em = exp_even(-theta_t(cd, nl, t));
    return berezin(mv_product(ell_mv<S>(), em));
  };
  const MultivectorD db = ext_d(b_field, p);
  MultivectorD rhs(db.n_form, db.n_fiber);
  for (const auto& [k, c] : db.terms) rhs.terms[k] = -times_i(c);
  return max_abs_diff(dudt, rhs);
}

}  // namespace fgb
