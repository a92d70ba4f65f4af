#include "fgb/euler_verify.hpp"

namespace fgb {

PulledForm pullback(const MultivectorD& form, const V2<double>& dtheta_dx) {
  PulledForm out;
  for (const auto& [k, c] : form.terms) {
    const uint32_t fm = MultivectorD::form_mask(k);
    if (MultivectorD::fiber_mask(k) != 0)
      throw std::invalid_argument("pullback expects a pure form");
    out.imag_norm = std::max(out.imag_norm, std::abs(c.im));
    switch (fm) {
      case 0b000: break;  // scalar part has no base-form image here
      case 0b001: out.c1 += c.re; break;
      case 0b010: out.c2 += c.re; break;
      case 0b100:  // dtheta -> th_1 dx1 + th_2 dx2
        out.c1 += c.re * dtheta_dx[0];
        out.c2 += c.re * dtheta_dx[1];
        break;
      case 0b011: out.c12 += c.re; break;                 // dx1 ^ dx2
      case 0b101: out.c12 += c.re * dtheta_dx[1]; break;  // dx1 ^ dth
      case 0b110: out.c12 -= c.re * dtheta_dx[0]; break;  // dx2 ^ dth
      default:
        // 3-forms pull back to zero on a surface
        break;
    }
  }
  return out;
}

void legendre_rule(int order, std::vector<double>& nodes, std::vector<double>& weights) {
  if (order < 1 || order > 32) throw std::invalid_argument("Gauss-Legendre order out of range");
  nodes.assign(size_t(order), 0.0);
  weights.assign(size_t(order), 0.0);
  for (int i = 0; i < order; ++i) {
    // Newton iteration from the Chebyshev initial guess
    double x = std::cos(M_PI * (i + 0.75) / (order + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= order; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = order * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[size_t(i)] = x;
    weights[size_t(i)] = 2.0 / ((1.0 - x * x) * pp * pp);
  }
}

namespace detail {

namespace {
// chart-coordinate distance bounds between a parameter rectangle and a point
void rect_distance_bounds(const ChartDomain& dom, const double lo[2], const double hi[2],
                          const V2<double>& center, double& dmin, double& dmax) {
  if (dom.polar) {
    // excisions in polar domains sit at the chart origin
    dmin = lo[0];
    dmax = hi[0];
    return;
  }
  double dmin2 = 0.0;
  for (int a = 0; a < 2; ++a) {
    const double c = center[size_t(a)];
    if (c < lo[a])
      dmin2 += (lo[a] - c) * (lo[a] - c);
    else if (c > hi[a])
      dmin2 += (c - hi[a]) * (c - hi[a]);
  }
  dmin = std::sqrt(dmin2);
  dmax = 0.0;
  for (int ca = 0; ca < 2; ++ca)
    for (int cb = 0; cb < 2; ++cb) {
      const double ux = (ca ? hi[0] : lo[0]) - center[0];
      const double vy = (cb ? hi[1] : lo[1]) - center[1];
      dmax = std::max(dmax, std::hypot(ux, vy));
    }
}
}  // namespace

CellClass classify_cell(const ChartDomain& dom, const std::vector<Excision>& exc,
                        const double lo[2], const double hi[2]) {
  CellClass cls = CellClass::outside;
  for (const Excision& e : exc) {
    if (dom.polar && std::hypot(e.center[0], e.center[1]) > 1e-12)
      throw std::invalid_argument("polar-domain excisions must sit at the chart origin");
    double dmin = 0.0, dmax = 0.0;
    rect_distance_bounds(dom, lo, hi, e.center, dmin, dmax);
    if (dmax <= e.radius) return CellClass::inside;
    if (dmin < e.radius) cls = CellClass::straddle;
  }
  return cls;
}

bool point_excised(const ChartDomain& dom, const std::vector<Excision>& exc, double u, double v) {
  for (const Excision& e : exc) {
    if (dom.polar) {
      if (u < e.radius) return true;
    } else if (std::hypot(u - e.center[0], v - e.center[1]) < e.radius) {
      return true;
    }
  }
  return false;
}

}  // namespace detail

FieldVariant make_field(const std::string& name) {
  if (name == "dipole") return DipoleField{};
  if (name == "spiral") return SpiralField{};
  if (name == "sine_pair") return SinePairField{};
  if (name == "sine_swap") return SineSwapField{};
  if (name == "constant") return ConstantField{};
  throw std::invalid_argument("unknown vector field '" + name + "'");
}

}  // namespace fgb
