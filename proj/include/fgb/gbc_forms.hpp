#pragma once

#include <algorithm>
#include <numeric>

#include "fgb/curvature.hpp"

// The transgression tower over a metric-compatible connection: the forms
// Phi_k, the primitive Pi = Upsilon_1 + Upsilon_2, the normalized Euler form,
// the fiber-volume correction, and the two-connection transgression. The
// assembly routines are dimension-generic over abstract matrices of forms;
// the *_at functions bind them to the n = 2 geometry pipeline.
namespace fgb {

using FormMatrix = std::vector<std::vector<MultivectorD>>;  // [row][col], row = upper index

namespace detail {
inline int perm_sign(const std::vector<int>& p) {
  int inv = 0;
  for (size_t i = 0; i < p.size(); ++i)
    for (size_t j = i + 1; j < p.size(); ++j)
      if (p[i] > p[j]) ++inv;
  return (inv & 1) ? -1 : 1;
}
}  // namespace detail

// Phi_k = sum eps_{a1..a_{n-1}} Om_{a1}^{a2} ^ ... ^ Om_{a_{2k-1}}^{a_{2k}}
//         ^ w_{a_{2k+1}}^n ^ ... ^ w_{a_{n-1}}^n
// over permutations of the Greek indices 1..n-1; k curvature factors.
inline MultivectorD phi_k_general(const FormMatrix& Om, const FormMatrix& w, int n, int k) {
  if (k < 0 || 2 * k > n - 1) throw std::domain_error("phi_k: k out of range");
  const MultivectorD& probe = w.at(size_t(n - 1)).at(0);
  MultivectorD acc(probe.n_form, probe.n_fiber);
  std::vector<int> perm(size_t(n - 1));
  std::iota(perm.begin(), perm.end(), 0);
  do {
    MultivectorD term = mv_one<double>(probe.n_form, probe.n_fiber);
    for (int t = 0; t < k; ++t)
      term = mv_product(term, Om.at(size_t(perm[size_t(2 * t + 1)])).at(size_t(perm[size_t(2 * t)])));
    for (int t = 2 * k; t < n - 1; ++t)
      term = mv_product(term, w.at(size_t(n - 1)).at(size_t(perm[size_t(t)])));
    acc = acc + term * double(detail::perm_sign(perm));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return acc;
}

// Gamma at integer and half-integer arguments (exact where it matters)
inline double gamma_half(int twice_s) {  // Gamma(twice_s / 2), twice_s >= 1
  if (twice_s % 2 == 0) {
    double r = 1.0;
    for (int k = 2; k < twice_s / 2 + 1; ++k) r *= (k - 1);
    return r;  // (s-1)!
  }
  double r = std::sqrt(M_PI);
  for (int m = twice_s - 2; m >= 1; m -= 2) r *= 0.5 * m;
  return r;
}

// coefficient of Phi_k inside Pi (gamma form of the primitive)
inline double pi_coefficient(int n, int k) {
  double fact_k = 1.0, fact_m = 1.0;
  for (int i = 2; i <= k; ++i) fact_k *= i;
  for (int i = 2; i <= n - 1 - 2 * k; ++i) fact_m *= i;
  const double sgn_n = (n % 2 == 0) ? 1.0 : -1.0;
  const double sgn_k = (k % 2 == 0) ? 1.0 : -1.0;
  return sgn_n * sgn_k * gamma_half(n - 2 * k) /
         (std::pow(M_PI, 0.5 * n) * fact_k * fact_m * std::pow(2.0, 2 * k + 1));
}

// classical double-factorial / binomial display of the same coefficients
inline double pi_coefficient_classical(int n, int k) {
  if (n % 2 == 0) {
    const int p = n / 2;
    if (k > p - 1) return 0.0;
    double dfact = 1.0;
    for (int m = 2 * p - 2 * k - 1; m >= 1; m -= 2) dfact *= m;
    double fact_k = 1.0;
    for (int i = 2; i <= k; ++i) fact_k *= i;
    const double sgn = (k % 2 == 0) ? 1.0 : -1.0;
    return sgn / (std::pow(2.0 * M_PI, p) * dfact * fact_k * std::pow(2.0, k));
  }
  const int p = (n - 1) / 2;
  double fact_p = 1.0;
  for (int i = 2; i <= p; ++i) fact_p *= i;
  double binom = 1.0;
  for (int i = 1; i <= k; ++i) binom = binom * (p - i + 1) / i;
  const double sgn = (k % 2 == 0) ? -1.0 : 1.0;  // (-1)^{k+1}
  return sgn * binom / (std::pow(M_PI, p) * std::pow(2.0, 2 * p + 1) * fact_p);
}

struct PiForms {
  MultivectorD pi, ups1, ups2;
};

inline PiForms assemble_pi(const std::vector<MultivectorD>& phis, int n) {
  if (phis.empty()) throw std::invalid_argument("assemble_pi: no Phi_k supplied");
  PiForms out;
  out.ups1 = phis[0] * pi_coefficient(n, 0);
  out.ups2 = MultivectorD(phis[0].n_form, phis[0].n_fiber);
  for (size_t k = 1; k < phis.size(); ++k)
    out.ups2 = out.ups2 + phis[k] * pi_coefficient(n, int(k));
  out.pi = out.ups1 + out.ups2;
  return out;
}

// normalized Euler form via the Berezin route, -(2 pi)^{-n/2} B(exp(-Omega));
// vanishes identically in odd rank
inline MultivectorD omega_euler_berezin(const FormMatrix& Om, int n) {
  const MultivectorD& probe = Om.at(0).at(1);
  // embedding 1/2 sum Om^j_i (x) e_i ^ e_j; coefficient of e_i^e_j (i<j) is Om[j][i]
  MultivectorD emb(probe.n_form, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (const auto& [key, c] : Om.at(size_t(j)).at(size_t(i)).terms) {
        if (MultivectorD::fiber_mask(key) != 0)
          throw std::domain_error("curvature entries must be pure forms");
        emb.add_term(MultivectorD::form_mask(key), (1u << i) | (1u << j), c);
      }
  const MultivectorD pf = berezin(exp_even(-emb));
  MultivectorD out(probe.n_form, probe.n_fiber);
  for (const auto& [key, c] : pf.terms)
    out.add_term(MultivectorD::form_mask(key), 0, c * (-1.0 / std::pow(2.0 * M_PI, 0.5 * n)));
  return out;
}

// the same Euler form through the explicit epsilon-symbol display
inline MultivectorD omega_euler_epsilon(const FormMatrix& Om, int n) {
  const MultivectorD& probe = Om.at(0).at(1);
  MultivectorD acc(probe.n_form, probe.n_fiber);
  if (n % 2 == 1) return acc;
  const int p = n / 2;
  std::vector<int> perm(static_cast<size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  do {
    MultivectorD term = mv_one<double>(probe.n_form, probe.n_fiber);
    for (int t = 0; t < p; ++t)
      term = mv_product(term, Om.at(size_t(perm[size_t(2 * t + 1)])).at(size_t(perm[size_t(2 * t)])));
    acc = acc + term * double(detail::perm_sign(perm));
  } while (std::next_permutation(perm.begin(), perm.end()));
  double fact_p = 1.0;
  for (int i = 2; i <= p; ++i) fact_p *= i;
  const double sgn = (p % 2 == 1) ? 1.0 : -1.0;  // (-1)^{p-1}
  return acc * (sgn / (std::pow(2.0, 2 * p) * std::pow(M_PI, p) * fact_p));
}

// ---------------------------------------------------------------------------
// bindings to the n = 2 geometry pipeline

inline FormMatrix conn_form_matrix(const ConnCoeffs<double>& cf) {
  FormMatrix w(2, std::vector<MultivectorD>(2, MultivectorD(kFormGen, kFiberGen)));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) w[size_t(i)][size_t(j)] = form1_to_mv(cf.w[i][j]);
  return w;
}

inline FormMatrix curv_form_matrix(const CurvatureData<double>& cd) {
  FormMatrix Om(2, std::vector<MultivectorD>(2, MultivectorD(kFormGen, kFiberGen)));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) Om[size_t(i)][size_t(j)] = form2_to_mv(cd.Om[i][j]);
  return Om;
}

// everything the Gauss-Bonnet integrand needs at one sphere-bundle point
struct GBCForms {
  MultivectorD phi0;         // (n-1)-form Phi_0
  MultivectorD ups1, ups2;   // primitive pieces (ups2 = 0 for n = 2)
  MultivectorD pi_total;     // Pi = ups1 + ups2
  MultivectorD omega_euler;  // n-form Euler form of the flavor
  MultivectorD d_form;       // correction D = -d ups2 - dlogV ^ ups1
  double V = 0.0;            // fiber volume at the base point
  V2<double> dlogV{};        // d log V components (base 1-form)
};

template <class M>
GBCForms gbc_at(const M& m, const ConnectionRequest& req, const SpherePoint& p, int fiber_nodes) {
  const V2<double> x = {p.x[0], p.x[1]};
  const CurvatureData<double> cd = curvature_at(m, req, p.chart, x, p.theta);

  GBCForms out;
  const FormMatrix w = conn_form_matrix(cd.conn);
  const FormMatrix Om = curv_form_matrix(cd);
  out.phi0 = phi_k_general(Om, w, 2, 0);
  auto pf = assemble_pi({out.phi0}, 2);
  out.ups1 = pf.ups1;
  out.ups2 = pf.ups2;
  out.pi_total = pf.pi;
  out.omega_euler = omega_euler_berezin(Om, 2);

  auto [V, dlog] = fiber_volume_with_dlog_fast(m, p.chart, x, fiber_nodes);
  out.V = V;
  out.dlogV = dlog;
  // n = 2: Upsilon_2 is an empty sum, so D = -dlogV ^ ups1 exactly
  const double dl[3] = {dlog[0], dlog[1], 0.0};
  out.d_form = -mv_product(form1_to_mv(dl), out.ups1);
  return out;
}

// || Omega^flavor - d Pi || at a point; holds for any metric-compatible flavor
template <class M>
double lemma41_residual(const M& m, const ConnectionRequest& req, const SpherePoint& p) {
  auto pi_field = [&]<class S>(int chart, const V2<S>& x, const S& th) -> Multivector<S> {
    const ConnCoeffs<S> cf = connection_at(m, req, chart, x, th);
    // n = 2: Pi = pi_coefficient(2,0) * w^2_1
    Multivector<S> r = form1_to_mv(cf.w[1][0]);
    return r * pi_coefficient(2, 0);
  };
  const MultivectorD dpi = ext_d(pi_field, p);
  const V2<double> x = {p.x[0], p.x[1]};
  const CurvatureData<double> cd = curvature_at(m, req, p.chart, x, p.theta);
  const MultivectorD oe = omega_euler_berezin(curv_form_matrix(cd), 2);
  return max_abs_diff(oe, dpi);
}

// || Omega/V - d(ups1/V) + D/V || at a point (the key pointwise identity
// behind the main theorem)
template <class M>
double eq43_residual(const M& m, const ConnectionRequest& req, const SpherePoint& p,
                     int fiber_nodes) {
  auto u1V_field = [&]<class S>(int chart, const V2<S>& x, const S& th) -> Multivector<S> {
    const ConnCoeffs<S> cf = connection_at(m, req, chart, x, th);
    const S V = fiber_volume_fast(m, chart, x, fiber_nodes);
    Multivector<S> r = form1_to_mv(cf.w[1][0]);
    Multivector<S> out(r.n_form, r.n_fiber);
    for (const auto& [k, c] : r.terms) out.terms[k] = c * (S(pi_coefficient(2, 0)) / V);
    return out;
  };
  const MultivectorD d_u1V = ext_d(u1V_field, p);
  const GBCForms gf = gbc_at(m, req, p, fiber_nodes);
  const MultivectorD lhs = gf.omega_euler * (1.0 / gf.V);
  const MultivectorD rhs = d_u1V - gf.d_form * (1.0 / gf.V);
  return max_abs_diff(lhs, rhs);
}

// ---------------------------------------------------------------------------
// transgression between the Cartan connection and D = nabla + B

// dD_s/ds as an (1,2) element: so-identification of -B (s-independent)
template <class M, class S>
Multivector<S> family_velocity_mv(const M& /*m*/, const Perturbation& pert, int chart,
                                  const V2<S>& x, const S& theta) {
  S B12[3];
  pert.eval(chart, x, theta, B12);
  Multivector<S> r(kFormGen, kFiberGen);
  // coefficient of e_1 ^ e_2 is (dw_s/ds)[1][0] = -B[1][0] = +B12
  for (int mm = 0; mm < 3; ++mm) r.add_term(1u << mm, 0b11, Cplx<S>(B12[mm]));
  return r;
}

// 8-node Gauss-Legendre on [0,1]; the integrand is polynomial in s, so this
// is exact to rounding
inline const std::array<std::pair<double, double>, 8>& gl8_unit() {
  static const std::array<std::pair<double, double>, 8> table = {{
      {0.01985507175123188, 0.05061426814518813},
      {0.10166676129318664, 0.11119051722668724},
      {0.2372337950418355, 0.15685332293894363},
      {0.40828267875217505, 0.18134189168918100},
      {0.59171732124782495, 0.18134189168918100},
      {0.7627662049581645, 0.15685332293894363},
      {0.89833323870681336, 0.11119051722668724},
      {0.98014492824876812, 0.05061426814518813},
  }};
  return table;
}

// Upsilon_3 = (2 pi)^{-n/2} int_0^1 B(exp(-Omega_s) . dD_s/ds) ds
template <class M, class S>
Multivector<S> upsilon3_at(const M& m, const Perturbation& pert, int chart, const V2<S>& x,
                           const S& theta) {
  Multivector<S> acc(kFormGen, kFiberGen);
  const Multivector<S> vel = family_velocity_mv(m, pert, chart, x, theta);
  for (const auto& [s, wgt] : gl8_unit()) {
    ConnectionRequest req{Flavor::family, s, &pert};
    const CurvatureData<S> cd = curvature_at(m, req, chart, x, theta);
    const Multivector<S> om = curvature_to_mv(cd);
    const Multivector<S> integ = berezin(mv_product(exp_even(-om), vel));
    acc = acc + integ * wgt;
  }
  return acc * (1.0 / (2.0 * M_PI));
}

// Surface shortcut: (-Omega_s)^k . dD_s/ds has fiber degree 2k + 2, and the
// Berezin integral keeps degree 2, so only k = 0 survives and the s-integral
// collapses. Kept equal to the quadrature route by a unit test.
template <class M, class S>
Multivector<S> upsilon3_surface(const M& m, const Perturbation& pert, int chart, const V2<S>& x,
                                const S& theta) {
  const Multivector<S> vel = family_velocity_mv(m, pert, chart, x, theta);
  return berezin(vel) * (1.0 / (2.0 * M_PI));
}

// E = D + d Upsilon_3, the corrected form of the second theorem
template <class M>
MultivectorD e_correction(const M& m, const Perturbation& pert, const SpherePoint& p,
                          int fiber_nodes) {
  ConnectionRequest cart{Flavor::cartan, 1.0, nullptr};
  const GBCForms gf = gbc_at(m, cart, p, fiber_nodes);
  auto u3_field = [&]<class S>(int chart, const V2<S>& x, const S& th) -> Multivector<S> {
    return upsilon3_at(m, pert, chart, x, th);
  };
  return gf.d_form + ext_d(u3_field, p);
}

// || Omega^nabla - Omega^D - d Upsilon_3 || at a point
template <class M>
double transgression_residual(const M& m, const Perturbation& pert, const SpherePoint& p) {
  const V2<double> x = {p.x[0], p.x[1]};
  ConnectionRequest cart{Flavor::cartan, 1.0, nullptr};
  ConnectionRequest endp{Flavor::family, 0.0, &pert};
  const MultivectorD oe_nabla =
      omega_euler_berezin(curv_form_matrix(curvature_at(m, cart, p.chart, x, p.theta)), 2);
  const MultivectorD oe_D =
      omega_euler_berezin(curv_form_matrix(curvature_at(m, endp, p.chart, x, p.theta)), 2);
  auto u3_field = [&]<class S>(int chart, const V2<S>& xx, const S& th) -> Multivector<S> {
    return upsilon3_at(m, pert, chart, xx, th);
  };
  const MultivectorD du3 = ext_d(u3_field, p);
  return max_abs_diff(oe_nabla, oe_D + du3);
}

// || d/ds Omega_s - D_s(dD_s/ds) || at a point, central difference in s
template <class M>
double family_curvature_rate_residual(const M& m, const Perturbation& pert, const SpherePoint& p,
                                      double s, double ds = 1e-4) {
  const V2<double> x = {p.x[0], p.x[1]};
  ConnectionRequest rp{Flavor::family, s + ds, &pert};
  ConnectionRequest rm{Flavor::family, s - ds, &pert};
  const MultivectorD om_p = curvature_to_mv(curvature_at(m, rp, p.chart, x, p.theta));
  const MultivectorD om_m = curvature_to_mv(curvature_at(m, rm, p.chart, x, p.theta));
  const MultivectorD lhs = (om_p - om_m) * (0.5 / ds);

  ConnectionRequest rs{Flavor::family, s, &pert};
  auto vel_field = [&]<class S>(int chart, const V2<S>& xx, const S& th) -> Multivector<S> {
    return family_velocity_mv(m, pert, chart, xx, th);
  };
  const MultivectorD rhs = nabla_on_A(m, rs, vel_field, p);
  return max_abs_diff(lhs, rhs);
}

// || d/ds Omega^{D_s} - (2 pi)^{-n/2} d B(exp(-Omega_s) . dD_s/ds) || at a point
template <class M>
double family_euler_rate_residual(const M& m, const Perturbation& pert, const SpherePoint& p,
                                  double s, double ds = 1e-4) {
  const V2<double> x = {p.x[0], p.x[1]};
  ConnectionRequest rp{Flavor::family, s + ds, &pert};
  ConnectionRequest rm{Flavor::family, s - ds, &pert};
  const MultivectorD oe_p =
      omega_euler_berezin(curv_form_matrix(curvature_at(m, rp, p.chart, x, p.theta)), 2);
  const MultivectorD oe_m =
      omega_euler_berezin(curv_form_matrix(curvature_at(m, rm, p.chart, x, p.theta)), 2);
  const MultivectorD lhs = (oe_p - oe_m) * (0.5 / ds);

  auto b_field = [&]<class S>(int chart, const V2<S>& xx, const S& th) -> Multivector<S> {
    ConnectionRequest rs{Flavor::family, s, &pert};
    const CurvatureData<S> cd = curvature_at(m, rs, chart, xx, th);
    const Multivector<S> vel = family_velocity_mv(m, pert, chart, xx, th);
    return berezin(mv_product(exp_even(-curvature_to_mv(cd)), vel));
  };
  const MultivectorD rhs = ext_d(b_field, p) * (1.0 / (2.0 * M_PI));
  return max_abs_diff(lhs, rhs);
}

}  // namespace fgb
