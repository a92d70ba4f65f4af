#include "fgb/metrics.hpp"

namespace fgb {

namespace {
double param_or(const std::map<std::string, double>& p, const std::string& key, double dflt) {
  auto it = p.find(key);
  return it == p.end() ? dflt : it->second;
}
}  // namespace

MetricVariant make_metric(const std::string& name, const std::map<std::string, double>& params) {
  if (name == "round_sphere") return RoundSphere{};
  if (name == "flat_torus") return FlatTorus{};
  if (name == "randers_torus") {
    RandersTorus m;
    m.b0 = param_or(params, "b0", 0.2);
    m.b1 = param_or(params, "b1", 0.1);
    if (std::abs(m.b0) + std::abs(m.b1) >= 1.0)
      throw std::invalid_argument("randers_torus: need |b0|+|b1| < 1 for a positive definite metric");
    return m;
  }
  if (name == "zermelo_sphere") {
    ZermeloSphere m;
    m.wind = param_or(params, "wind", 0.3);
    if (std::abs(m.wind) >= 1.0)
      throw std::invalid_argument("zermelo_sphere: wind speed must stay below 1");
    return m;
  }
  if (name == "quartic_torus") {
    QuarticTorus m;
    m.eps = param_or(params, "eps", 0.2);
    if (m.eps < 0.0 || m.eps > 0.5)
      throw std::invalid_argument("quartic_torus: eps outside the validated range [0, 0.5]");
    return m;
  }
  throw std::invalid_argument("unknown metric '" + name + "'");
}

std::vector<std::string> metric_zoo_names() {
  return {"round_sphere", "flat_torus", "randers_torus", "zermelo_sphere", "quartic_torus"};
}

}  // namespace fgb
