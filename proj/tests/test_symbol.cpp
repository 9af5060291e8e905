#include <doctest.h>

#include <cmath>

#include "bergman/symbol.hpp"

using namespace bergman;
using doctest::Approx;

namespace {
void check_close(complexd a, complexd b, double tol = 1e-12) {
  CHECK(std::abs(a - b) <= tol);
}
}  // namespace

TEST_CASE("monomial evaluation and algebra") {
  Symbol f = Symbol::monomial1(2, 1);  // z^2 zbar
  complexd z(0.3, -0.4);
  check_close(f.eval1(z), z * z * std::conj(z));
  CHECK(f.degree() == 3);

  Symbol g = Symbol::monomial1(1, 0) + Symbol::monomial1(0, 1);  // z + zbar
  Symbol g2 = g * g;  // z^2 + 2 |z|^2 + zbar^2
  CHECK(g2.term_count() == 3);
  check_close(g2.eval1(z), std::pow(2.0 * z.real(), 2));

  Symbol h = g2 - Symbol::monomial1(1, 1, 2.0);
  check_close(h.eval1(z), z * z + std::conj(z) * std::conj(z));

  check_close(f.conj().eval1(z), std::conj(f.eval1(z)));
  check_close(f.scaled(complexd(0, 2)).eval1(z), complexd(0, 2) * f.eval1(z));
}

TEST_CASE("cancellation prunes zero terms") {
  Symbol f = Symbol::monomial1(1, 0) - Symbol::monomial1(1, 0);
  CHECK(f.empty());
  CHECK(f.degree() == 0);
}

TEST_CASE("(1 - |z|^2)^s expands correctly") {
  Symbol f = Symbol::one_minus_sq_pow(1, 2);
  complexd z(0.5, 0.0);
  check_close(f.eval1(z), 0.5625);  // (1 - 0.25)^2
  CHECK(f.term_count() == 3);

  Symbol f2 = Symbol::one_minus_sq_pow(2, 3);
  Point w{complexd(0.3, 0.2), complexd(-0.1, 0.45)};
  const double u = norm_sq(w);
  check_close(f2.eval(w), std::pow(1.0 - u, 3), 1e-13);

  Symbol f0 = Symbol::one_minus_sq_pow(1, 0);
  check_close(f0.eval1(z), 1.0);
}

TEST_CASE("multivariate evaluation") {
  // z1 zbar2^2
  Symbol f = Symbol::monomial({1, 0}, {0, 2}, complexd(2, 1));
  Point w{complexd(0.2, 0.1), complexd(-0.3, 0.25)};
  check_close(f.eval(w), complexd(2, 1) * w[0] * std::conj(w[1]) * std::conj(w[1]));
  CHECK(f.dim() == 2);
}

TEST_CASE("charge decomposition reconstructs the symbol") {
  // f = z^2 zbar + 3 zbar^2 - 2
  Symbol f = Symbol::monomial1(2, 1) + Symbol::monomial1(0, 2, 3.0) +
             Symbol::constant(1, -2.0);
  auto cr = f.charge_radial();
  REQUIRE(cr.size() == 3);
  REQUIRE(cr.count(1) == 1);
  REQUIRE(cr.count(-2) == 1);
  REQUIRE(cr.count(0) == 1);
  // charge 1 part z |z|^2: R_1 = (0, 1)
  CHECK(cr[1].size() == 2);
  check_close(cr[1][0], 0.0);
  check_close(cr[1][1], 1.0);
  check_close(cr[-2][0], 3.0);
  check_close(cr[0][0], -2.0);

  complexd z(0.4, -0.3);
  const double u = std::norm(z);
  complexd acc = 0.0;
  for (const auto& [q, R] : cr) {
    complexd chi = q >= 0 ? std::pow(z, q) : std::pow(std::conj(z), -q);
    complexd radial = 0.0;
    for (int i = int(R.size()) - 1; i >= 0; --i) radial = radial * u + R[i];
    acc += chi * radial;
  }
  check_close(acc, f.eval1(z), 1e-13);
}

TEST_CASE("(1-u) basis transform is the exact binomial rewrite") {
  auto s0 = to_one_minus_u_basis({complexd(1.0)});
  REQUIRE(s0.size() == 1);
  check_close(s0[0], 1.0);

  // u = 1 - (1-u)
  auto s1 = to_one_minus_u_basis({0.0, 1.0});
  check_close(s1[0], 1.0);
  check_close(s1[1], -1.0);

  // u^2 = 1 - 2(1-u) + (1-u)^2
  auto s2 = to_one_minus_u_basis({0.0, 0.0, 1.0});
  check_close(s2[0], 1.0);
  check_close(s2[1], -2.0);
  check_close(s2[2], 1.0);

  // round trip at a point
  std::vector<complexd> r{complexd(0.3, 1.0), complexd(-2.0, 0.1), complexd(0, 4),
                          complexd(5, -0.7)};
  auto s = to_one_minus_u_basis(r);
  const double u = 0.3;
  complexd pu = 0.0, ps = 0.0;
  for (int i = int(r.size()) - 1; i >= 0; --i) pu = pu * u + r[i];
  for (int e = int(s.size()) - 1; e >= 0; --e) ps = ps * (1.0 - u) + s[e];
  check_close(pu, ps, 1e-13);
}
