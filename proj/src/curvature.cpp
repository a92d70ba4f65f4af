#include "fgb/curvature.hpp"

namespace fgb {

namespace {
MultivectorD d_step(const FormFieldFn& f, const SpherePoint& p, double h) {
  MultivectorD acc;
  bool init = false;
  for (int m = 0; m < 3; ++m) {
    SpherePoint pp = p, pm = p;
    if (m < 2) {
      pp.x[size_t(m)] += h;
      pm.x[size_t(m)] -= h;
    } else {
      pp.theta += h;
      pm.theta -= h;
    }
    const MultivectorD diff = (f(pp) - f(pm)) * (0.5 / h);
    if (!init) {
      acc = MultivectorD(diff.n_form, diff.n_fiber);
      init = true;
    }
    for (const auto& [k, c] : diff.terms) {
      const uint32_t fm = MultivectorD::form_mask(k), bm = MultivectorD::fiber_mask(k);
      const uint32_t bit = 1u << m;
      if (fm & bit) continue;
      acc.add_term(fm | bit, bm, c * double(merge_sign(bit, fm)));
    }
  }
  return acc;
}
}  // namespace

MultivectorD ext_d_fd(const FormFieldFn& f, const SpherePoint& p, double h, bool richardson) {
  MultivectorD d1 = d_step(f, p, h);
  if (!richardson) return d1;
  MultivectorD d2 = d_step(f, p, 0.5 * h);
  return (d2 * 4.0 - d1) * (1.0 / 3.0);
}

}  // namespace fgb
