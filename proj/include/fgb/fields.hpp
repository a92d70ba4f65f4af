#pragma once

#include <variant>

#include "fgb/metrics.hpp"

// Vector fields with isolated zeros on the zoo surfaces. Sphere fields are
// given per stereographic chart and glue across z -> 1/z; torus fields are
// doubly periodic. Zeros carry their chart, position and expected index.
namespace fgb {

struct FieldZero {
  int chart = 0;
  V2<double> pos{};
  int index = 0;
};

// z d/dz: gradient-like dipole with a source at each pole (index +1 each)
struct DipoleField {
  std::string name() const { return "dipole"; }
  std::vector<FieldZero> zeros() const {
    return {{0, {0.0, 0.0}, 1}, {1, {0.0, 0.0}, 1}};
  }
  template <class S>
  V2<S> eval(int chart, const V2<S>& x) const {
    if (chart == 0) return x;
    return {-x[0], -x[1]};
  }
};

// (1 + i kappa) z d/dz: spiral flavor of the dipole, same zeros and indices
struct SpiralField {
  double kappa = 0.5;
  std::string name() const { return "spiral"; }
  std::vector<FieldZero> zeros() const {
    return {{0, {0.0, 0.0}, 1}, {1, {0.0, 0.0}, 1}};
  }
  template <class S>
  V2<S> eval(int chart, const V2<S>& x) const {
    const double sgn = (chart == 0) ? 1.0 : -1.0;
    return {sgn * (x[0] - kappa * x[1]), sgn * (x[1] + kappa * x[0])};
  }
};

// (sin(x1 - pi/2), sin(x2 - pi/2)) on the torus: two sources, two saddles
struct SinePairField {
  std::string name() const { return "sine_pair"; }
  std::vector<FieldZero> zeros() const {
    const double a = M_PI / 2, b = 3 * M_PI / 2;
    return {{0, {a, a}, 1}, {0, {b, b}, 1}, {0, {a, b}, -1}, {0, {b, a}, -1}};
  }
  template <class S>
  V2<S> eval(int /*chart*/, const V2<S>& x) const {
    return {sin(x[0] - M_PI / 2), sin(x[1] - M_PI / 2)};
  }
};

// component-swapped variant: indices trade places, structurally different
struct SineSwapField {
  std::string name() const { return "sine_swap"; }
  std::vector<FieldZero> zeros() const {
    const double a = M_PI / 2, b = 3 * M_PI / 2;
    return {{0, {a, a}, -1}, {0, {b, b}, -1}, {0, {a, b}, 1}, {0, {b, a}, 1}};
  }
  template <class S>
  V2<S> eval(int /*chart*/, const V2<S>& x) const {
    return {sin(x[1] - M_PI / 2), sin(x[0] - M_PI / 2)};
  }
};

// constant direction field; nonvanishing, so the torus integral needs no excision
struct ConstantField {
  double angle = 0.3;
  std::string name() const { return "constant"; }
  std::vector<FieldZero> zeros() const { return {}; }
  template <class S>
  V2<S> eval(int /*chart*/, const V2<S>& x) const {
    (void)x;
    return {S(std::cos(angle)), S(std::sin(angle))};
  }
};

// X = M (x - c) on one chart; local probe fields for boundary integrals
struct LinearLocalField {
  V2<double> center{};
  double mat[2][2] = {{1.0, 0.0}, {0.0, 1.0}};
  std::string label = "linear";
  std::string name() const { return label; }
  std::vector<FieldZero> zeros() const {
    const double det = mat[0][0] * mat[1][1] - mat[0][1] * mat[1][0];
    return {{0, center, det > 0 ? 1 : -1}};
  }
  template <class S>
  V2<S> eval(int /*chart*/, const V2<S>& x) const {
    const V2<S> d = {x[0] - center[0], x[1] - center[1]};
    return {mat[0][0] * d[0] + mat[0][1] * d[1], mat[1][0] * d[0] + mat[1][1] * d[1]};
  }
};

using FieldVariant = std::variant<DipoleField, SpiralField, SinePairField, SineSwapField,
                                  ConstantField, LinearLocalField>;

FieldVariant make_field(const std::string& name);

}  // namespace fgb
