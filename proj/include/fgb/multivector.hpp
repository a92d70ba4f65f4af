#pragma once

#include <bit>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "fgb/jet.hpp"

// Pointwise bigraded exterior algebra: differential-form generators tensored
// with fiber-frame generators. An element is a complex linear combination of
// monomials dz^I (x) e_J, stored canonically with strictly increasing indices
// inside each slot. The product rule carries the fiber/form crossing sign
//   (a (x) b) . (c (x) d) = (-1)^{|b||c|} (a ^ c) (x) (b ^ d).
namespace fgb {

template <class S>
struct Multivector {
  int n_form = 0;   // number of available form generators (dim of the base of forms)
  int n_fiber = 0;  // fiber rank
  std::map<uint64_t, Cplx<S>> terms;  // key = form mask << 32 | fiber mask

  Multivector() = default;
  Multivector(int nf, int nb) : n_form(nf), n_fiber(nb) {}

  static uint64_t key(uint32_t form_mask, uint32_t fiber_mask) {
    return (uint64_t(form_mask) << 32) | uint64_t(fiber_mask);
  }
  static uint32_t form_mask(uint64_t k) { return uint32_t(k >> 32); }
  static uint32_t fiber_mask(uint64_t k) { return uint32_t(k & 0xffffffffu); }

  void add_term(uint32_t fm, uint32_t bm, const Cplx<S>& c) {
    if (all_zero(c)) return;
    auto& slot = terms[key(fm, bm)];
    slot += c;
  }

  bool empty() const { return terms.empty(); }
};

using MultivectorD = Multivector<double>;

// sign of merging two strictly increasing index sets given as bitmasks:
// (-1)^{#inversions} when concatenating a then b and sorting.
inline int merge_sign(uint32_t a, uint32_t b) {
  int inv = 0;
  uint32_t bb = b;
  while (bb) {
    const int j = std::countr_zero(bb);
    bb &= bb - 1;
    inv += std::popcount(a >> (j + 1));
  }
  return (inv & 1) ? -1 : 1;
}

// Build a monomial from explicit generator index sequences (0-based); repeated
// indices give zero, out-of-order ones pick up the permutation sign.
template <class S>
Multivector<S> monomial(int n_form, int n_fiber, const std::vector<int>& form_idx,
                        const std::vector<int>& fiber_idx, const Cplx<S>& coeff) {
  Multivector<S> r(n_form, n_fiber);
  uint32_t fm = 0, bm = 0;
  int sign = 1;
  for (int i : form_idx) {
    if (i < 0 || i >= n_form) throw std::invalid_argument("form generator index out of range");
    const uint32_t bit = 1u << i;
    if (fm & bit) return r;  // dz^i ^ dz^i = 0
    sign *= merge_sign(fm, bit);
    fm |= bit;
  }
  for (int i : fiber_idx) {
    if (i < 0 || i >= n_fiber) throw std::invalid_argument("fiber generator index out of range");
    const uint32_t bit = 1u << i;
    if (bm & bit) return r;
    sign *= merge_sign(bm, bit);
    bm |= bit;
  }
  r.add_term(fm, bm, coeff * double(sign));
  return r;
}

template <class S>
Multivector<S> mv_zero(int n_form, int n_fiber) {
  return Multivector<S>(n_form, n_fiber);
}

template <class S>
Multivector<S> mv_one(int n_form, int n_fiber) {
  Multivector<S> r(n_form, n_fiber);
  r.add_term(0, 0, Cplx<S>(S(1.0)));
  return r;
}

template <class S>
void check_compatible(const Multivector<S>& a, const Multivector<S>& b) {
  if (a.n_form != b.n_form || a.n_fiber != b.n_fiber)
    throw std::invalid_argument("multivector generator counts differ");
}

template <class S>
Multivector<S> operator+(const Multivector<S>& a, const Multivector<S>& b) {
  check_compatible(a, b);
  Multivector<S> r = a;
  for (const auto& [k, c] : b.terms) r.terms[k] += c;
  return r;
}

template <class S>
Multivector<S> operator-(const Multivector<S>& a, const Multivector<S>& b) {
  check_compatible(a, b);
  Multivector<S> r = a;
  for (const auto& [k, c] : b.terms) r.terms[k] -= c;
  return r;
}

template <class S>
Multivector<S> operator-(const Multivector<S>& a) {
  Multivector<S> r(a.n_form, a.n_fiber);
  for (const auto& [k, c] : a.terms) r.terms[k] = -c;
  return r;
}

template <class S>
Multivector<S> operator*(const Multivector<S>& a, const Cplx<S>& c) {
  Multivector<S> r(a.n_form, a.n_fiber);
  for (const auto& [k, v] : a.terms) r.terms[k] = v * c;
  return r;
}
template <class S>
Multivector<S> operator*(const Cplx<S>& c, const Multivector<S>& a) {
  return a * c;
}
template <class S>
Multivector<S> operator*(const Multivector<S>& a, double c) {
  Multivector<S> r(a.n_form, a.n_fiber);
  for (const auto& [k, v] : a.terms) r.terms[k] = v * c;
  return r;
}
template <class S>
Multivector<S> operator*(double c, const Multivector<S>& a) {
  return a * c;
}

// graded product with the bigraded crossing sign (-1)^{jk},
// j = fiber degree of the left term, k = form degree of the right term
template <class S>
Multivector<S> mv_product(const Multivector<S>& a, const Multivector<S>& b) {
  check_compatible(a, b);
  Multivector<S> r(a.n_form, a.n_fiber);
  for (const auto& [ka, ca] : a.terms) {
    const uint32_t fa = Multivector<S>::form_mask(ka), ba = Multivector<S>::fiber_mask(ka);
    for (const auto& [kb, cb] : b.terms) {
      const uint32_t fb = Multivector<S>::form_mask(kb), bb = Multivector<S>::fiber_mask(kb);
      if ((fa & fb) || (ba & bb)) continue;
      int sign = merge_sign(fa, fb) * merge_sign(ba, bb);
      if ((std::popcount(ba) * std::popcount(fb)) & 1) sign = -sign;
      r.add_term(fa | fb, ba | bb, (ca * cb) * double(sign));
    }
  }
  return r;
}

template <class S>
Multivector<S> operator*(const Multivector<S>& a, const Multivector<S>& b) {
  return mv_product(a, b);
}

// contraction by a fiber vector s (bidegree (0,1)); frame metric is the
// identity, so iota(s) pairs coefficients directly:
//   iota(s)(a (x) e_{j1}^...^e_{jq}) = sum_k (-1)^{i+k-1} s_{jk} a (x) (... e_{jk} dropped ...)
template <class S>
Multivector<S> contract(const Multivector<S>& s, const Multivector<S>& m) {
  check_compatible(s, m);
  std::vector<Cplx<S>> sc(size_t(s.n_fiber));
  for (const auto& [k, c] : s.terms) {
    if (Multivector<S>::form_mask(k) != 0 || std::popcount(Multivector<S>::fiber_mask(k)) != 1)
      throw std::domain_error("contraction direction must have bidegree (0,1)");
    sc[size_t(std::countr_zero(Multivector<S>::fiber_mask(k)))] = c;
  }
  Multivector<S> r(m.n_form, m.n_fiber);
  for (const auto& [k, c] : m.terms) {
    const uint32_t fm = Multivector<S>::form_mask(k);
    uint32_t bm = Multivector<S>::fiber_mask(k);
    const int i = std::popcount(fm);
    int pos = 1;  // 1-based position within the increasing fiber monomial
    uint32_t rest = bm;
    while (rest) {
      const int j = std::countr_zero(rest);
      rest &= rest - 1;
      const int sign = ((i + pos - 1) & 1) ? -1 : 1;
      r.add_term(fm, bm & ~(1u << j), (c * sc[size_t(j)]) * double(sign));
      ++pos;
    }
  }
  return r;
}

// Berezin integral: keep the top fiber-degree coefficient (canonical storage
// makes the orientation sign +1), pass the form slot through.
template <class S>
Multivector<S> berezin(const Multivector<S>& m) {
  Multivector<S> r(m.n_form, m.n_fiber);
  const uint32_t full = (m.n_fiber >= 32) ? ~0u : ((1u << m.n_fiber) - 1u);
  for (const auto& [k, c] : m.terms)
    if (Multivector<S>::fiber_mask(k) == full) r.add_term(Multivector<S>::form_mask(k), 0, c);
  return r;
}

template <class S>
int max_total_degree(const Multivector<S>& m) {
  int deg = 0;
  for (const auto& [k, c] : m.terms) {
    (void)c;
    const int d = std::popcount(Multivector<S>::form_mask(k)) +
                  std::popcount(Multivector<S>::fiber_mask(k));
    if (d > deg) deg = d;
  }
  return deg;
}

// exp of an element with only even-degree terms. The scalar block
// exponentiates exactly; the rest is nilpotent so the series terminates.
template <class S>
Multivector<S> exp_even(const Multivector<S>& m, int truncation = -1) {
  Multivector<S> nil(m.n_form, m.n_fiber);
  Cplx<S> scalar{};
  for (const auto& [k, c] : m.terms) {
    const int d = std::popcount(Multivector<S>::form_mask(k)) +
                  std::popcount(Multivector<S>::fiber_mask(k));
    if (d & 1) throw std::domain_error("exp_even: odd-degree term present");
    if (d == 0)
      scalar += c;
    else
      nil.terms[k] = c;
  }
  const int cap = truncation >= 0 ? truncation : (m.n_form + m.n_fiber);
  Multivector<S> sum = mv_one<S>(m.n_form, m.n_fiber);
  Multivector<S> pw = mv_one<S>(m.n_form, m.n_fiber);
  for (int k = 1; k <= cap; ++k) {
    pw = mv_product(pw, nil) * (1.0 / double(k));
    if (pw.empty()) break;
    sum = sum + pw;
  }
  return sum * cexp(scalar);
}

// f applied to t^2/2 + (it nabla_ell + omega) through its Taylor coefficients
// at t^2/2: sum_k f^{(k)}(t^2/2)/k! (it nabla_ell + omega)^k. Nilpotency makes
// the sum finite; supplying too few derivatives is an error.
template <class S>
Multivector<S> f_of_theta(const std::vector<double>& f_derivs, double t,
                          const Multivector<S>& nabla_ell, const Multivector<S>& omega) {
  check_compatible(nabla_ell, omega);
  Multivector<S> base(nabla_ell.n_form, nabla_ell.n_fiber);
  for (const auto& [k, c] : nabla_ell.terms) base.terms[k] = times_i(c) * t;
  base = base + omega;

  Multivector<S> sum(base.n_form, base.n_fiber);
  Multivector<S> pw = mv_one<S>(base.n_form, base.n_fiber);
  double fact = 1.0;
  for (size_t k = 0;; ++k) {
    if (k >= f_derivs.size()) {
      if (!pw.empty())
        throw std::domain_error("f_of_theta: derivative list exhausted before nilpotency");
      break;
    }
    if (k > 0) fact *= double(k);
    sum = sum + pw * (f_derivs[k] / fact);
    pw = mv_product(pw, base);
    if (pw.empty()) break;
    if (k + 1 >= f_derivs.size() && !pw.empty())
      throw std::domain_error("f_of_theta: derivative list exhausted before nilpotency");
  }
  return sum;
}

template <class S>
Multivector<S> bidegree_part(const Multivector<S>& m, int form_deg, int fiber_deg) {
  Multivector<S> r(m.n_form, m.n_fiber);
  for (const auto& [k, c] : m.terms)
    if (std::popcount(Multivector<S>::form_mask(k)) == form_deg &&
        std::popcount(Multivector<S>::fiber_mask(k)) == fiber_deg)
      r.terms[k] = c;
  return r;
}

template <class S>
double max_abs_coeff(const Multivector<S>& m) {
  double r = 0.0;
  for (const auto& [k, c] : m.terms) {
    (void)k;
    const double a = abs_value(c);
    if (a > r) r = a;
  }
  return r;
}

template <class S>
double max_abs_diff(const Multivector<S>& a, const Multivector<S>& b) {
  return max_abs_coeff(a - b);
}

// drop terms with |coeff| <= eps (exact zeros by default)
template <class S>
Multivector<S> pruned(const Multivector<S>& m, double eps = 0.0) {
  Multivector<S> r(m.n_form, m.n_fiber);
  for (const auto& [k, c] : m.terms)
    if (abs_value(c) > eps) r.terms[k] = c;
  return r;
}

// ---------------------------------------------------------------------------
// Skew matrices and Pfaffians

// antisymmetric matrix stored by its strict upper triangle
template <class T>
struct SkewMatrix {
  int dim = 0;
  std::vector<T> upper;  // (i,j), i<j, row-major over the triangle

  SkewMatrix() = default;
  explicit SkewMatrix(int n, const T& zero = T{}) : dim(n), upper(size_t(n) * (n - 1) / 2, zero) {}

  size_t tri_index(int i, int j) const {  // requires i < j
    return size_t(i) * dim - size_t(i) * (i + 1) / 2 + size_t(j - i - 1);
  }
  void set(int i, int j, const T& v) {
    if (i == j) throw std::invalid_argument("skew matrix has zero diagonal");
    if (i < j)
      upper[tri_index(i, j)] = v;
    else
      upper[tri_index(j, i)] = -v;
  }
  T get(int i, int j) const {
    if (i == j) return T{};
    return (i < j) ? upper[tri_index(i, j)] : -upper[tri_index(j, i)];
  }
};

template <class T>
T zero_like(const T&) {
  return T{};
}
template <class S>
Multivector<S> zero_like(const Multivector<S>& m) {
  return Multivector<S>(m.n_form, m.n_fiber);
}

namespace detail {
template <class T>
T pfaffian_rec(const SkewMatrix<T>& A, std::vector<int>& idx) {
  if (idx.empty()) {
    throw std::logic_error("pfaffian recursion on empty index set");
  }
  if (idx.size() == 2) return A.get(idx[0], idx[1]);
  const int i0 = idx[0];
  bool first = true;
  T acc{};
  for (size_t j = 1; j < idx.size(); ++j) {
    const int pj = idx[j];
    std::vector<int> rest;
    rest.reserve(idx.size() - 2);
    for (size_t k = 1; k < idx.size(); ++k)
      if (k != j) rest.push_back(idx[k]);
    // expanding along the first row: sign alternates with the partner position
    const double sgn = (j % 2 == 1) ? 1.0 : -1.0;
    T term = A.get(i0, pj) * pfaffian_rec(A, rest) * sgn;
    if (first) {
      acc = term;
      first = false;
    } else {
      acc = acc + term;
    }
  }
  return acc;
}
}  // namespace detail

// combinatorial Pfaffian: signed sum over perfect matchings. Serves as the
// independent cross-check of the Berezin route; odd dimension gives 0.
template <class T>
T pfaffian_matching(const SkewMatrix<T>& A) {
  if (A.dim == 0) {
    throw std::invalid_argument("pfaffian of empty matrix undefined here");
  }
  if (A.dim % 2 == 1) return A.upper.empty() ? T{} : zero_like(A.upper.front());
  std::vector<int> idx(size_t(A.dim));
  for (int i = 0; i < A.dim; ++i) idx[size_t(i)] = i;
  return detail::pfaffian_rec(A, idx);
}

// so(n) <-> Lambda^2 identification: B |-> 1/2 sum g(B e_i, e_j) e_i ^ e_j.
// With matrix convention (B e_i)^j = B[j][i] this reads sum_{i<j} B_{ji} e_i^e_j.
template <class S>
Multivector<S> so_to_wedge2(const SkewMatrix<Cplx<S>>& B, int n_form) {
  Multivector<S> r(n_form, B.dim);
  for (int i = 0; i < B.dim; ++i)
    for (int j = i + 1; j < B.dim; ++j) r.add_term(0, (1u << i) | (1u << j), B.get(j, i));
  return r;
}

inline Multivector<double> so_to_wedge2(const SkewMatrix<double>& B, int n_form = 0) {
  Multivector<double> r(n_form, B.dim);
  for (int i = 0; i < B.dim; ++i)
    for (int j = i + 1; j < B.dim; ++j) r.add_term(0, (1u << i) | (1u << j), Cplx<double>(B.get(j, i)));
  return r;
}

// inverse of so_to_wedge2 on pure (0,2) elements
template <class S>
SkewMatrix<Cplx<S>> wedge2_to_so(const Multivector<S>& m) {
  SkewMatrix<Cplx<S>> B(m.n_fiber);
  for (const auto& [k, c] : m.terms) {
    const uint32_t bm = Multivector<S>::fiber_mask(k);
    if (Multivector<S>::form_mask(k) != 0 || std::popcount(bm) != 2)
      throw std::domain_error("wedge2_to_so: element is not of bidegree (0,2)");
    const int i = std::countr_zero(bm);
    const int j = std::countr_zero(bm & (bm - 1));
    B.set(j, i, c);  // coefficient of e_i ^ e_j (i<j) is B_{ji}
  }
  return B;
}

// Embed a 2-form-valued skew matrix as the curvature-style element
// 1/2 sum Omega_{ji} (x) e_i ^ e_j of the algebra with n fiber generators.
template <class S>
Multivector<S> skew_forms_to_mv(const SkewMatrix<Multivector<S>>& A) {
  if (A.dim == 0) throw std::invalid_argument("empty skew matrix");
  const Multivector<S>& probe = A.upper.at(0);
  Multivector<S> r(probe.n_form, A.dim);
  for (int i = 0; i < A.dim; ++i)
    for (int j = i + 1; j < A.dim; ++j) {
      const Multivector<S> entry = A.get(j, i);  // already n_fiber-agnostic pure form
      for (const auto& [k, c] : entry.terms) {
        if (Multivector<S>::fiber_mask(k) != 0)
          throw std::domain_error("entries must be pure forms");
        // form part commutes past nothing here: (a (x) 1).(1 (x) e_i e_j)
        r.add_term(Multivector<S>::form_mask(k), (1u << i) | (1u << j), c);
      }
    }
  return r;
}

// Pfaffian through the Berezin integral: B(exp(-embed(A))). Agrees with
// pfaffian_matching(A) for scalar and 2-form-valued skew matrices.
template <class S>
Multivector<S> pfaffian_berezin(const SkewMatrix<Multivector<S>>& A) {
  return berezin(exp_even(-skew_forms_to_mv(A)));
}

inline double pfaffian_berezin(const SkewMatrix<double>& A) {
  const MultivectorD emb = so_to_wedge2(A);
  const MultivectorD b = berezin(exp_even(-emb));
  double r = 0.0;
  for (const auto& [k, c] : b.terms) {
    (void)k;
    r += c.re;
  }
  return r;
}

std::string to_string(const MultivectorD& m);

}  // namespace fgb
