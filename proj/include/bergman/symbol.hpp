#pragma once

#include <map>
#include <vector>

#include "bergman/geometry.hpp"

// Polynomial symbols f(z) = sum_t c_t z^{a_t} zbar^{b_t} on B_n, with
// multi-index exponents.  The algebra (sum, product, conjugate) is closed;
// (1 - |z|^2)^s enters through its binomial/multinomial expansion.

namespace bergman {

using MultiIndex = std::vector<int>;

struct SymbolTerm {
  MultiIndex a;  // holomorphic exponents
  MultiIndex b;  // anti-holomorphic exponents
  complexd coeff;
};

class Symbol {
 public:
  explicit Symbol(int n = 1) : n_(n) {}

  static Symbol constant(int n, complexd c);
  static Symbol monomial(const MultiIndex& a, const MultiIndex& b, complexd c = 1.0);
  // n = 1 convenience: z^a zbar^b.
  static Symbol monomial1(int a, int b, complexd c = 1.0);
  // (1 - |z|^2)^s, expanded.
  static Symbol one_minus_sq_pow(int n, int s);

  int dim() const { return n_; }
  bool empty() const { return terms_.empty(); }
  size_t term_count() const { return terms_.size(); }
  std::vector<SymbolTerm> terms() const;

  // max over terms of |a| + |b|
  int degree() const;

  Symbol conj() const;
  Symbol operator+(const Symbol& g) const;
  Symbol operator-(const Symbol& g) const;
  Symbol operator*(const Symbol& g) const;
  Symbol scaled(complexd c) const;

  complexd eval(const Point& z) const;
  complexd eval1(complexd z) const;  // n = 1

  // n = 1 only: group terms by charge q = a - b.  Component q holds the
  // radial polynomial R_q with f(z) = sum_q chi_q(z) R_q(|z|^2), where
  // chi_q(z) = z^q (q >= 0) or zbar^{-q} (q < 0); R_q[i] multiplies u^i.
  std::map<int, std::vector<complexd>> charge_radial() const;

  void add_term(const MultiIndex& a, const MultiIndex& b, complexd c);

 private:
  int n_;
  // key = a concatenated with b; zero coefficients pruned.
  std::map<std::vector<int>, complexd> terms_;
};

// Rewrites a polynomial sum_i r[i] u^i in the basis (1-u)^e: returns s with
// p(u) = sum_e s[e] (1-u)^e.  Exact binomial transform; stable at the small
// degrees that arise from symbols.
std::vector<complexd> to_one_minus_u_basis(const std::vector<complexd>& r);

}  // namespace bergman
