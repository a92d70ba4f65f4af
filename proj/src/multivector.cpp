#include "fgb/multivector.hpp"

#include <cstdio>

namespace fgb {

std::string to_string(const MultivectorD& m) {
  if (m.terms.empty()) return "0";
  std::string out;
  char buf[96];
  for (const auto& [k, c] : m.terms) {
    const uint32_t fm = MultivectorD::form_mask(k), bm = MultivectorD::fiber_mask(k);
    std::snprintf(buf, sizeof buf, "%s(%.6g%+.6gi)", out.empty() ? "" : " + ", c.re, c.im);
    out += buf;
    for (int i = 0; i < m.n_form; ++i)
      if (fm & (1u << i)) {
        std::snprintf(buf, sizeof buf, " dz%d", i + 1);
        out += buf;
      }
    for (int i = 0; i < m.n_fiber; ++i)
      if (bm & (1u << i)) {
        std::snprintf(buf, sizeof buf, " e%d", i + 1);
        out += buf;
      }
  }
  return out;
}

}  // namespace fgb
