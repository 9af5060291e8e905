#include "bergman/symbol.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace bergman {

namespace {

std::vector<int> make_key(const MultiIndex& a, const MultiIndex& b) {
  std::vector<int> k;
  k.reserve(a.size() + b.size());
  k.insert(k.end(), a.begin(), a.end());
  k.insert(k.end(), b.begin(), b.end());
  return k;
}

}  // namespace

void Symbol::add_term(const MultiIndex& a, const MultiIndex& b, complexd c) {
  if ((int)a.size() != n_ || (int)b.size() != n_)
    throw std::invalid_argument("Symbol: exponent dimension mismatch");
  for (int e : a)
    if (e < 0) throw std::invalid_argument("Symbol: negative exponent");
  for (int e : b)
    if (e < 0) throw std::invalid_argument("Symbol: negative exponent");
  auto key = make_key(a, b);
  auto it = terms_.find(key);
  if (it == terms_.end()) {
    if (c != 0.0) terms_.emplace(std::move(key), c);
  } else {
    it->second += c;
    if (it->second == 0.0) terms_.erase(it);
  }
}

Symbol Symbol::constant(int n, complexd c) {
  Symbol f(n);
  f.add_term(MultiIndex(n, 0), MultiIndex(n, 0), c);
  return f;
}

Symbol Symbol::monomial(const MultiIndex& a, const MultiIndex& b, complexd c) {
  Symbol f((int)a.size());
  f.add_term(a, b, c);
  return f;
}

Symbol Symbol::monomial1(int a, int b, complexd c) {
  return monomial(MultiIndex{a}, MultiIndex{b}, c);
}

Symbol Symbol::one_minus_sq_pow(int n, int s) {
  if (s < 0) throw std::invalid_argument("one_minus_sq_pow: negative power");
  Symbol acc = constant(n, 1.0);
  Symbol base = constant(n, 1.0);
  for (int i = 0; i < n; ++i) {
    MultiIndex e(n, 0);
    e[i] = 1;
    base = base - monomial(e, e, 1.0);
  }
  for (int k = 0; k < s; ++k) acc = acc * base;
  return acc;
}

std::vector<SymbolTerm> Symbol::terms() const {
  std::vector<SymbolTerm> out;
  out.reserve(terms_.size());
  for (const auto& [key, c] : terms_) {
    SymbolTerm t;
    t.a.assign(key.begin(), key.begin() + n_);
    t.b.assign(key.begin() + n_, key.end());
    t.coeff = c;
    out.push_back(std::move(t));
  }
  return out;
}

int Symbol::degree() const {
  int d = 0;
  for (const auto& [key, c] : terms_) {
    int s = 0;
    for (int e : key) s += e;
    d = std::max(d, s);
  }
  return d;
}

Symbol Symbol::conj() const {
  Symbol g(n_);
  for (const auto& [key, c] : terms_) {
    std::vector<int> k(key.begin() + n_, key.end());
    k.insert(k.end(), key.begin(), key.begin() + n_);
    g.terms_[std::move(k)] = std::conj(c);
  }
  return g;
}

Symbol Symbol::operator+(const Symbol& g) const {
  if (n_ != g.n_) throw std::invalid_argument("Symbol: dimension mismatch");
  Symbol h = *this;
  for (const auto& [key, c] : g.terms_) {
    auto it = h.terms_.find(key);
    if (it == h.terms_.end()) {
      h.terms_.emplace(key, c);
    } else {
      it->second += c;
      if (it->second == 0.0) h.terms_.erase(it);
    }
  }
  return h;
}

Symbol Symbol::operator-(const Symbol& g) const { return *this + g.scaled(-1.0); }

Symbol Symbol::operator*(const Symbol& g) const {
  if (n_ != g.n_) throw std::invalid_argument("Symbol: dimension mismatch");
  Symbol h(n_);
  for (const auto& [k1, c1] : terms_) {
    for (const auto& [k2, c2] : g.terms_) {
      std::vector<int> k(k1.size());
      for (size_t i = 0; i < k.size(); ++i) k[i] = k1[i] + k2[i];
      auto it = h.terms_.find(k);
      if (it == h.terms_.end()) {
        h.terms_.emplace(std::move(k), c1 * c2);
      } else {
        it->second += c1 * c2;
        if (it->second == 0.0) h.terms_.erase(it);
      }
    }
  }
  return h;
}

Symbol Symbol::scaled(complexd c) const {
  Symbol h(n_);
  if (c == 0.0) return h;
  for (const auto& [key, v] : terms_) h.terms_.emplace(key, v * c);
  return h;
}

complexd Symbol::eval(const Point& z) const {
  if ((int)z.size() != n_) throw std::invalid_argument("Symbol::eval: dimension mismatch");
  complexd s = 0.0;
  for (const auto& [key, c] : terms_) {
    complexd t = c;
    for (int i = 0; i < n_; ++i) {
      for (int k = 0; k < key[i]; ++k) t *= z[i];
      for (int k = 0; k < key[n_ + i]; ++k) t *= std::conj(z[i]);
    }
    s += t;
  }
  return s;
}

complexd Symbol::eval1(complexd z) const {
  if (n_ != 1) throw std::invalid_argument("Symbol::eval1: requires n = 1");
  complexd s = 0.0;
  const complexd zb = std::conj(z);
  for (const auto& [key, c] : terms_) {
    complexd t = c;
    for (int k = 0; k < key[0]; ++k) t *= z;
    for (int k = 0; k < key[1]; ++k) t *= zb;
    s += t;
  }
  return s;
}

std::map<int, std::vector<complexd>> Symbol::charge_radial() const {
  if (n_ != 1) throw std::invalid_argument("charge_radial: requires n = 1");
  std::map<int, std::vector<complexd>> out;
  for (const auto& [key, c] : terms_) {
    const int a = key[0], b = key[1];
    const int q = a - b, i = std::min(a, b);
    auto& r = out[q];
    if ((int)r.size() <= i) r.resize(i + 1, 0.0);
    r[i] += c;
  }
  return out;
}

std::vector<complexd> to_one_minus_u_basis(const std::vector<complexd>& r) {
  // u^i = (1 - (1-u))^i = sum_e binom(i, e) (-1)^e (1-u)^e
  std::vector<complexd> s(r.size(), 0.0);
  for (size_t i = 0; i < r.size(); ++i) {
    if (r[i] == 0.0) continue;
    double binom = 1.0;
    for (size_t e = 0; e <= i; ++e) {
      s[e] += r[i] * binom * ((e % 2) ? -1.0 : 1.0);
      binom = binom * double(i - e) / double(e + 1);
    }
  }
  while (!s.empty() && s.back() == 0.0) s.pop_back();
  return s;
}

}  // namespace bergman
