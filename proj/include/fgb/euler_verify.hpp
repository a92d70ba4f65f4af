#pragma once

#include <omp.h>

#include <optional>

#include "fgb/fields.hpp"
#include "fgb/gbc_forms.hpp"

// End-to-end evaluation of the Gauss-Bonnet identity: section lift and
// pullback along a vector field, Poincare-Hopf indices by winding number,
// and the excised base quadrature of -(Omega + correction)/V.
//
// Quadrature kernels come in an OpenMP-parallel flavor and a serial reference
// flavor; both traverse cells in the same order and reduce with compensated
// summation, so their results are bit-identical.
namespace fgb {

// compensated (Kahan) accumulator
struct KahanSum {
  double sum = 0.0, carry = 0.0;
  void add(double v) {
    const double y = v - carry;
    const volatile double t = sum + y;
    const volatile double z = t - sum;
    carry = z - y;
    sum = t;
  }
  double value() const { return sum; }
};

// fiber angle of the section induced by a field, theta = atan2(X2, X1)
template <class F, class S>
S section_angle(const F& field, int chart, const V2<S>& x) {
  const V2<S> X = field.eval(chart, x);
  return atan2(X[1], X[0]);
}

template <class M, class F>
SpherePoint section_lift(const M& metric, const F& field, int chart, const V2<double>& x) {
  (void)metric;
  SpherePoint p;
  p.chart = chart;
  p.x = {x[0], x[1]};
  p.theta = section_angle(field, chart, x);
  return p;
}

// d theta / d x^m of the lift, one jet pass
template <class F>
V2<double> lift_jacobian(const F& field, int chart, const V2<double>& x) {
  using J = Jet<double, 2>;
  V2<J> xj = {J(x[0]), J(x[1])};
  xj[0].d[0] = 1.0;
  xj[1].d[1] = 1.0;
  const J th = section_angle(field, chart, xj);
  return {th.d[0], th.d[1]};
}

// pull a (complex) p-form on SM back along the section: dtheta -> th_m dx^m.
// Returns base-form coefficients; imaginary parts must be tiny for the
// geometric forms fed through here.
struct PulledForm {
  double c1 = 0.0, c2 = 0.0;  // 1-form part (dx1, dx2)
  double c12 = 0.0;           // 2-form part (dx1 ^ dx2)
  double imag_norm = 0.0;
};

PulledForm pullback(const MultivectorD& form, const V2<double>& dtheta_dx);

// winding number of X/|X| along a chart circle of the given radius
template <class F>
int winding_index(const F& field, int chart, const V2<double>& zero, double radius,
                  int samples = 256) {
  double prev = 0.0, total = 0.0;
  for (int k = 0; k <= samples; ++k) {
    const double t = 2 * M_PI * k / samples;
    const V2<double> x = {zero[0] + radius * std::cos(t), zero[1] + radius * std::sin(t)};
    const V2<double> X = field.eval(chart, x);
    const double nrm = std::hypot(X[0], X[1]);
    if (nrm < 1e-12) throw std::runtime_error("winding probe hit a near-zero of the field");
    const double ang = std::atan2(X[1], X[0]);
    if (k > 0) {
      double d = ang - prev;
      while (d > M_PI) d -= 2 * M_PI;
      while (d < -M_PI) d += 2 * M_PI;
      total += d;
    }
    prev = ang;
  }
  const double w = total / (2 * M_PI);
  const int wi = int(std::lround(w));
  if (std::abs(w - wi) > 0.05)
    throw std::runtime_error("winding number failed to converge to an integer");
  return wi;
}

// ---------------------------------------------------------------------------
// quadrature description

struct QuadratureSpec {
  int base_cells = 200;                          // cells per axis per chart
  int gl_order = 4;                              // tensor Gauss-Legendre order
  std::vector<double> epsilons = {0.1, 0.05, 0.025};  // excision radii, decreasing
  int fiber_nodes = 32;                          // trapezoid nodes for V(x)
  int subdiv_depth = 6;                          // excision clipping depth
};

struct EpsRow {
  double epsilon = 0.0;
  double estimate = 0.0;
  long nodes = 0;
  double seconds = 0.0;
};

struct ResidualSummary {
  double structure_torsion = 0.0;
  double structure_metric = 0.0;
  double lemma41 = 0.0;
  double eq43 = 0.0;
  int sample_points = 0;
};

struct GBCReport {
  std::string schema = "1";
  std::string metric, flavor, field;
  double chi = 0.0;
  double vol_sphere = 0.0;  // 2 pi^{n/2} / Gamma(n/2)
  double target = 0.0;      // chi / vol_sphere
  std::vector<EpsRow> rows;
  double extrapolated = 0.0;
  double abs_error = 0.0;
  bool converged = true;
  ResidualSummary residuals;
  int threads = 1;
  unsigned seed = 0;
  double total_seconds = 0.0;
};

enum class RunFlavor { cartan, family_endpoint };

// Gauss-Legendre nodes/weights on [-1, 1]
void legendre_rule(int order, std::vector<double>& nodes, std::vector<double>& weights);

// the integrand density of the theorem at a base point of one chart:
// coefficient of [X]^* ((Omega + correction)/V) against dx1 ^ dx2
template <class M, class F>
double gbc_density(const M& metric, const F& field, RunFlavor flavor, const Perturbation* pert,
                   int chart, const V2<double>& x, int fiber_nodes) {
  const V2<double> dth = lift_jacobian(field, chart, x);
  const SpherePoint p = section_lift(metric, field, chart, x);

  MultivectorD total(kFormGen, kFiberGen);
  if (flavor == RunFlavor::cartan) {
    ConnectionRequest req{Flavor::cartan, 1.0, nullptr};
    const GBCForms gf = gbc_at(metric, req, p, fiber_nodes);
    total = (gf.omega_euler + gf.d_form) * (1.0 / gf.V);
  } else {
    if (!pert) throw std::invalid_argument("family flavor requires a perturbation");
    ConnectionRequest endp{Flavor::family, 0.0, pert};
    const V2<double> xx = {p.x[0], p.x[1]};
    const auto cd = curvature_at(metric, endp, p.chart, xx, p.theta);
    const MultivectorD omega_D = omega_euler_berezin(curv_form_matrix(cd), 2);
    ConnectionRequest cart{Flavor::cartan, 1.0, nullptr};
    const GBCForms gf = gbc_at(metric, cart, p, fiber_nodes);
    auto u3_field = [&]<class S>(int ch, const V2<S>& xs, const S& th) -> Multivector<S> {
      return upsilon3_surface(metric, *pert, ch, xs, th);
    };
    const MultivectorD e_form = gf.d_form + ext_d(u3_field, p);
    total = (omega_D + e_form) * (1.0 / gf.V);
  }
  const PulledForm pf = pullback(total, dth);
  if (pf.imag_norm > 1e-8)
    throw std::runtime_error("integrand developed a non-negligible imaginary part");
  return pf.c12;
}

// variant of the density with the correction term dropped (sensitivity control)
template <class M, class F>
double gbc_density_no_correction(const M& metric, const F& field, int chart, const V2<double>& x,
                                 int fiber_nodes) {
  const V2<double> dth = lift_jacobian(field, chart, x);
  const SpherePoint p = section_lift(metric, field, chart, x);
  ConnectionRequest req{Flavor::cartan, 1.0, nullptr};
  const GBCForms gf = gbc_at(metric, req, p, fiber_nodes);
  const PulledForm pf = pullback(gf.omega_euler * (1.0 / gf.V), dth);
  return pf.c12;
}

// ---------------------------------------------------------------------------
// chart-domain quadrature

struct ChartDomain {
  int chart = 0;
  double lo[2] = {0.0, 0.0};
  double hi[2] = {1.0, 1.0};
  bool polar = false;  // param (r, phi), chart x = (r cos phi, r sin phi)
};

struct Excision {
  V2<double> center{};
  double radius = 0.0;
};

// per-metric integration atlas: torus box or two polar hemisphere disks
template <class M>
std::vector<ChartDomain> integration_domains(const M& metric) {
  std::vector<ChartDomain> out;
  if (metric.sphere_atlas()) {
    for (int c = 0; c < 2; ++c) {
      ChartDomain d;
      d.chart = c;
      d.lo[0] = 0.0;
      d.hi[0] = 1.0;  // radial: hemisphere maps to the unit disk
      d.lo[1] = 0.0;
      d.hi[1] = 2 * M_PI;
      d.polar = true;
      out.push_back(d);
    }
  } else {
    ChartDomain d;
    d.chart = 0;
    d.hi[0] = d.hi[1] = 2 * M_PI;
    out.push_back(d);
  }
  return out;
}

struct CellResult {
  double integral = 0.0;
  long nodes = 0;
};

namespace detail {

enum class CellClass { outside, inside, straddle };

CellClass classify_cell(const ChartDomain& dom, const std::vector<Excision>& exc,
                        const double lo[2], const double hi[2]);
bool point_excised(const ChartDomain& dom, const std::vector<Excision>& exc, double u, double v);

// recursive cell integration with subdivision-based clipping
template <class Density>
void integrate_cell(const ChartDomain& dom, const std::vector<Excision>& exc,
                    const Density& density, const std::vector<double>& gl_nodes,
                    const std::vector<double>& gl_weights, const double lo[2], const double hi[2],
                    int depth, int max_depth, CellResult& out) {
  const CellClass cls = classify_cell(dom, exc, lo, hi);
  if (cls == CellClass::inside) return;
  if (cls == CellClass::straddle && depth < max_depth) {
    const double mid[2] = {0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])};
    const double l00[2] = {lo[0], lo[1]}, h00[2] = {mid[0], mid[1]};
    const double l10[2] = {mid[0], lo[1]}, h10[2] = {hi[0], mid[1]};
    const double l01[2] = {lo[0], mid[1]}, h01[2] = {mid[0], hi[1]};
    const double l11[2] = {mid[0], mid[1]}, h11[2] = {hi[0], hi[1]};
    integrate_cell(dom, exc, density, gl_nodes, gl_weights, l00, h00, depth + 1, max_depth, out);
    integrate_cell(dom, exc, density, gl_nodes, gl_weights, l10, h10, depth + 1, max_depth, out);
    integrate_cell(dom, exc, density, gl_nodes, gl_weights, l01, h01, depth + 1, max_depth, out);
    integrate_cell(dom, exc, density, gl_nodes, gl_weights, l11, h11, depth + 1, max_depth, out);
    return;
  }
  // leaf: tensor Gauss-Legendre, masking nodes inside an excision disk
  const double cu = 0.5 * (hi[0] - lo[0]), cv = 0.5 * (hi[1] - lo[1]);
  const double mu = 0.5 * (hi[0] + lo[0]), mv = 0.5 * (hi[1] + lo[1]);
  KahanSum acc;
  const bool masked = (cls == CellClass::straddle);
  for (size_t a = 0; a < gl_nodes.size(); ++a)
    for (size_t b = 0; b < gl_nodes.size(); ++b) {
      const double u = mu + cu * gl_nodes[a];
      const double v = mv + cv * gl_nodes[b];
      if (masked && point_excised(dom, exc, u, v)) continue;
      double x0 = u, x1 = v, jac = 1.0;
      if (dom.polar) {
        x0 = u * std::cos(v);
        x1 = u * std::sin(v);
        jac = u;
      }
      const double w = gl_weights[a] * gl_weights[b] * cu * cv * jac;
      acc.add(w * density(dom.chart, V2<double>{x0, x1}));
      ++out.nodes;
    }
  out.integral += acc.value();
}

}  // namespace detail

// integrate a density over one chart domain minus the excision disks.
// The OpenMP path distributes base cells; reduction order is fixed.
template <class Density>
CellResult integrate_domain(const ChartDomain& dom, const std::vector<Excision>& exc,
                            const Density& density, const QuadratureSpec& spec, bool parallel) {
  std::vector<double> gl_nodes, gl_weights;
  legendre_rule(spec.gl_order, gl_nodes, gl_weights);

  const int nc = spec.base_cells;
  const double du = (dom.hi[0] - dom.lo[0]) / nc;
  const double dv = (dom.hi[1] - dom.lo[1]) / nc;
  std::vector<CellResult> cells(size_t(nc) * size_t(nc));

#pragma omp parallel for schedule(dynamic, 8) if (parallel)
  for (int idx = 0; idx < nc * nc; ++idx) {
    const int i = idx / nc, j = idx % nc;
    const double lo[2] = {dom.lo[0] + i * du, dom.lo[1] + j * dv};
    const double hi[2] = {dom.lo[0] + (i + 1) * du, dom.lo[1] + (j + 1) * dv};
    detail::integrate_cell(dom, exc, density, gl_nodes, gl_weights, lo, hi, 0, spec.subdiv_depth,
                           cells[size_t(idx)]);
  }

  CellResult total;
  KahanSum acc;
  for (const CellResult& c : cells) {
    acc.add(c.integral);
    total.nodes += c.nodes;
  }
  total.integral = acc.value();
  return total;
}

// excision list for a domain at one radius (zeros on other charts are theirs)
template <class F>
std::vector<Excision> excisions_for(const F& field, const ChartDomain& dom, double eps) {
  std::vector<Excision> out;
  for (const FieldZero& z : field.zeros())
    if (z.chart == dom.chart) out.push_back({z.pos, eps});
  return out;
}

// all excision radii in one pass: cells fully outside the largest radius
// contribute the same value to every radius and are integrated once. The
// per-radius arithmetic is identical to separate runs, so results match the
// single-radius kernel bit for bit.
template <class Density>
std::vector<CellResult> integrate_domain_multi(const ChartDomain& dom,
                                               const std::vector<std::vector<Excision>>& exc_per_eps,
                                               const Density& density, const QuadratureSpec& spec,
                                               bool parallel) {
  std::vector<double> gl_nodes, gl_weights;
  legendre_rule(spec.gl_order, gl_nodes, gl_weights);

  const size_t ne = exc_per_eps.size();
  const int nc = spec.base_cells;
  const double du = (dom.hi[0] - dom.lo[0]) / nc;
  const double dv = (dom.hi[1] - dom.lo[1]) / nc;
  std::vector<std::vector<CellResult>> cells(ne);
  for (auto& c : cells) c.resize(size_t(nc) * size_t(nc));

#pragma omp parallel for schedule(dynamic, 8) if (parallel)
  for (int idx = 0; idx < nc * nc; ++idx) {
    const int i = idx / nc, j = idx % nc;
    const double lo[2] = {dom.lo[0] + i * du, dom.lo[1] + j * dv};
    const double hi[2] = {dom.lo[0] + (i + 1) * du, dom.lo[1] + (j + 1) * dv};
    if (detail::classify_cell(dom, exc_per_eps[0], lo, hi) == detail::CellClass::outside) {
      CellResult one;
      detail::integrate_cell(dom, exc_per_eps[0], density, gl_nodes, gl_weights, lo, hi, 0,
                             spec.subdiv_depth, one);
      for (size_t e = 0; e < ne; ++e) cells[e][size_t(idx)] = one;
    } else {
      for (size_t e = 0; e < ne; ++e)
        detail::integrate_cell(dom, exc_per_eps[e], density, gl_nodes, gl_weights, lo, hi, 0,
                               spec.subdiv_depth, cells[e][size_t(idx)]);
    }
  }

  std::vector<CellResult> out(ne);
  for (size_t e = 0; e < ne; ++e) {
    KahanSum acc;
    for (const CellResult& c : cells[e]) {
      acc.add(c.integral);
      out[e].nodes += c.nodes;
    }
    out[e].integral = acc.value();
  }
  return out;
}

// full estimate of -int [X]^*((Omega + correction)/V) with relaxation in the
// excision radius; Richardson extrapolation uses the two smallest radii
template <class M, class F>
GBCReport euler_estimate(const M& metric, const F& field, RunFlavor flavor,
                         const Perturbation* pert, const QuadratureSpec& spec, bool parallel) {
  if (spec.epsilons.empty()) throw std::invalid_argument("need at least one excision radius");
  for (size_t i = 1; i < spec.epsilons.size(); ++i)
    if (spec.epsilons[i] >= spec.epsilons[i - 1])
      throw std::invalid_argument("excision radii must decrease strictly");

  GBCReport rep;
  rep.metric = metric.name();
  rep.flavor = (flavor == RunFlavor::cartan) ? "cartan" : "family";
  rep.field = field.name();
  rep.chi = metric.chi();
  rep.vol_sphere = 2.0 * M_PI;  // 2 pi^{n/2} / Gamma(n/2) at n = 2
  rep.target = rep.chi / rep.vol_sphere;

  auto density = [&](int chart, const V2<double>& x) {
    return gbc_density(metric, field, flavor, pert, chart, x, spec.fiber_nodes);
  };

  const auto domains = integration_domains(metric);
  const size_t ne = spec.epsilons.size();
  std::vector<KahanSum> acc(ne);
  std::vector<long> nodes(ne, 0);
  const double t0 = omp_get_wtime();
  for (const ChartDomain& dom : domains) {
    std::vector<std::vector<Excision>> exc;
    exc.reserve(ne);
    for (double eps : spec.epsilons) exc.push_back(excisions_for(field, dom, eps));
    const auto results = integrate_domain_multi(dom, exc, density, spec, parallel);
    for (size_t e = 0; e < ne; ++e) {
      acc[e].add(results[e].integral);
      nodes[e] += results[e].nodes;
    }
  }
  rep.total_seconds = omp_get_wtime() - t0;
  for (size_t e = 0; e < ne; ++e) {
    EpsRow row;
    row.epsilon = spec.epsilons[e];
    row.estimate = -acc[e].value();
    row.nodes = nodes[e];
    row.seconds = rep.total_seconds / double(ne);  // excision sweeps share the bulk pass
    rep.rows.push_back(row);
  }

  if (rep.rows.size() >= 2) {
    const EpsRow& r1 = rep.rows[rep.rows.size() - 2];
    const EpsRow& r2 = rep.rows.back();
    // Richardson step from the two smallest radii. With three rows the
    // observed order is measured and used; otherwise first order is assumed.
    double order = 1.0;
    if (rep.rows.size() >= 3) {
      const EpsRow& r0 = rep.rows[rep.rows.size() - 3];
      const double d1 = std::abs(r1.estimate - r0.estimate);
      const double d2 = std::abs(r2.estimate - r1.estimate);
      const double hratio = r1.epsilon / r2.epsilon;
      if (d1 > 1e-14 && d2 > 1e-14 && hratio > 1.0)
        order = std::clamp(std::log(d1 / d2) / std::log(hratio), 0.5, 4.0);
      rep.converged = (d2 <= d1 * 1.05) || d2 < 1e-10;
    }
    const double hr = r1.epsilon / r2.epsilon;
    const double denom = std::pow(hr, order) - 1.0;
    rep.extrapolated = r2.estimate + (r2.estimate - r1.estimate) / denom;
  } else {
    rep.extrapolated = rep.rows.back().estimate;
  }
  rep.abs_error = std::abs(rep.extrapolated - rep.target);
  return rep;
}

// serial reference implementation, kept for testing and benchmarking
template <class M, class F>
GBCReport euler_estimate_serial(const M& metric, const F& field, RunFlavor flavor,
                                const Perturbation* pert, const QuadratureSpec& spec) {
  return euler_estimate(metric, field, flavor, pert, spec, false);
}

// line integral of [X]^*(ups1/V) along the excision circle of one zero;
// converges to (-1)^n index / vol(S^{n-1}) as the radius shrinks
template <class M, class F>
double boundary_check(const M& metric, const F& field, int chart, const V2<double>& zero,
                      double eps, int fiber_nodes = 32, int samples = 256) {
  KahanSum acc;
  const double dt = 2 * M_PI / samples;
  for (int k = 0; k < samples; ++k) {
    const double t = dt * k;
    const V2<double> x = {zero[0] + eps * std::cos(t), zero[1] + eps * std::sin(t)};
    const SpherePoint p = section_lift(metric, field, chart, x);
    const V2<double> dth = lift_jacobian(field, chart, x);
    ConnectionRequest req{Flavor::cartan, 1.0, nullptr};
    const V2<double> xx = {p.x[0], p.x[1]};
    const ConnCoeffs<double> cf = connection_at(metric, req, p.chart, xx, p.theta);
    const double V = fiber_volume_fast(metric, p.chart, xx, fiber_nodes);
    const MultivectorD ups1 = form1_to_mv(cf.w[1][0]) * pi_coefficient(2, 0);
    const PulledForm pf = pullback(ups1 * (1.0 / V), dth);
    // dx/dt = eps(-sin t, cos t)
    acc.add((pf.c1 * (-eps * std::sin(t)) + pf.c2 * (eps * std::cos(t))) * dt);
  }
  return acc.value();
}

}  // namespace fgb
