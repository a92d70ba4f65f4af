#pragma once

#include <array>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "fgb/jet.hpp"

// Metric zoo on closed surfaces. Every metric exposes F^2(chart, x, y) as a
// scalar-generic evaluator; all derivative towers are built on top of it by
// forward-mode nesting. Sphere metrics use two stereographic charts glued by
// z -> 1/z (orientation preserving), torus metrics a single periodic chart
// [0,2pi)^2.
namespace fgb {

template <class S>
using V2 = std::array<S, 2>;
template <class S>
using M2 = std::array<std::array<S, 2>, 2>;

// round conformal factor 4/(1+|x|^2)^2 of the unit sphere in a stereographic chart
template <class S>
S sphere_conformal(const V2<S>& x) {
  const S r2 = x[0] * x[0] + x[1] * x[1];
  const S d = 1.0 + r2;
  return 4.0 / (d * d);
}

// z -> 1/z on chart coordinates; involutive transition of the two-chart atlas
template <class S>
V2<S> sphere_chart_transition(const V2<S>& x) {
  const S r2 = x[0] * x[0] + x[1] * x[1];
  return {x[0] / r2, -x[1] / r2};
}

struct RoundSphere {
  std::string name() const { return "round_sphere"; }
  int charts() const { return 2; }
  double chi() const { return 2.0; }
  bool sphere_atlas() const { return true; }

  template <class S>
  S F2(int /*chart*/, const V2<S>& x, const V2<S>& y) const {
    return sphere_conformal(x) * (y[0] * y[0] + y[1] * y[1]);
  }
};

struct FlatTorus {
  std::string name() const { return "flat_torus"; }
  int charts() const { return 1; }
  double chi() const { return 0.0; }
  bool sphere_atlas() const { return false; }

  template <class S>
  S F2(int /*chart*/, const V2<S>& /*x*/, const V2<S>& y) const {
    return y[0] * y[0] + y[1] * y[1];
  }
};

// Randers metric |y| + b(x1) y1 on the torus, b(x1) = b0 + b1 sin x1.
// Requires |b0| + |b1| < 1 so the fundamental tensor stays positive definite.
struct RandersTorus {
  double b0 = 0.2;
  double b1 = 0.1;

  std::string name() const { return "randers_torus"; }
  int charts() const { return 1; }
  double chi() const { return 0.0; }
  bool sphere_atlas() const { return false; }

  template <class S>
  S F2(int /*chart*/, const V2<S>& x, const V2<S>& y) const {
    const S alpha = sqrt(y[0] * y[0] + y[1] * y[1]);
    const S beta = (b0 + b1 * sin(x[0])) * y[0];
    const S f = alpha + beta;
    return f * f;
  }
};

// Randers metric on the sphere obtained by Zermelo navigation against a
// rotational wind W = wind * (rotation generator), |W|_h < 1.
struct ZermeloSphere {
  double wind = 0.3;

  std::string name() const { return "zermelo_sphere"; }
  int charts() const { return 2; }
  double chi() const { return 2.0; }
  bool sphere_atlas() const { return true; }

  template <class S>
  V2<S> wind_at(int chart, const V2<S>& x) const {
    // rotation about the polar axis; opposite sense in the second chart
    if (chart == 0) return {-x[1] * wind, x[0] * wind};
    return {x[1] * wind, -x[0] * wind};
  }

  template <class S>
  S F2(int chart, const V2<S>& x, const V2<S>& y) const {
    const S lam = sphere_conformal(x);
    const V2<S> w = wind_at(chart, x);
    const S hyy = lam * (y[0] * y[0] + y[1] * y[1]);
    const S hwy = lam * (w[0] * y[0] + w[1] * y[1]);
    const S hww = lam * (w[0] * w[0] + w[1] * w[1]);
    const S den = 1.0 - hww;
    const S f = (sqrt(den * hyy + hwy * hwy) - hwy) / den;
    return f * f;
  }
};

// Locally Minkowski norm on the torus: a quartic perturbation of the
// Euclidean norm, F = (|y|^4 + eps (y1^4 + y2^4))^{1/4}. x-independent.
struct QuarticTorus {
  double eps = 0.2;

  std::string name() const { return "quartic_torus"; }
  int charts() const { return 1; }
  double chi() const { return 0.0; }
  bool sphere_atlas() const { return false; }

  template <class S>
  S F2(int /*chart*/, const V2<S>& /*x*/, const V2<S>& y) const {
    const S q = y[0] * y[0] + y[1] * y[1];
    const S quart = q * q + eps * (y[0] * y[0] * y[0] * y[0] + y[1] * y[1] * y[1] * y[1]);
    return sqrt(quart);
  }
};

using MetricVariant = std::variant<RoundSphere, FlatTorus, RandersTorus, ZermeloSphere, QuarticTorus>;

// resolve a zoo entry by name with numeric parameters; throws on unknown
// names or parameters outside the admissible range
MetricVariant make_metric(const std::string& name, const std::map<std::string, double>& params);

std::vector<std::string> metric_zoo_names();

}  // namespace fgb
