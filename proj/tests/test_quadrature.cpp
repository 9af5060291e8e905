#include <doctest.h>

#include <cmath>
#include <vector>

#include "bergman/quadrature.hpp"

using namespace bergman;
using doctest::Approx;

namespace {
double apply(const Rule1D& r, double (*f)(double)) {
  double s = 0.0;
  for (size_t i = 0; i < r.x.size(); ++i) s += r.w[i] * f(r.x[i]);
  return s;
}

double beta_fn(double a, double b) {
  return std::exp(std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
}
}  // namespace

TEST_CASE("gauss-legendre on [0,1] and [a,b]") {
  Rule1D r5 = gauss_legendre(5);
  CHECK(apply(r5, [](double u) { return u * u * u * u; }) == Approx(0.2));
  CHECK(apply(r5, [](double u) { return std::pow(u, 9); }) == Approx(0.1));  // degree 9 = 2n-1
  double mass = 0.0;
  for (double w : r5.w) mass += w;
  CHECK(mass == Approx(1.0));

  Rule1D r2 = gauss_legendre(2);
  CHECK(r2.x[0] == Approx(0.5 - 0.5 / std::sqrt(3.0)));
  CHECK(r2.x[1] == Approx(0.5 + 0.5 / std::sqrt(3.0)));

  Rule1D rab = gauss_legendre(8, -1.0, 3.0);
  CHECK(apply(rab, [](double u) { return u * u; }) == Approx(28.0 / 3.0));
}

TEST_CASE("jacobi rule absorbs the weight u^m (1-u)^gamma") {
  // gamma = 0, m = 0 is Legendre: mass 1
  OrthoRecurrence plain = jacobi_recurrence01(0.0, 0.0, 8);
  CHECK(plain.b[0] == Approx(1.0));
  Rule1D r3 = gauss_rule(plain, 3);
  CHECK(apply(r3, [](double u) { return std::pow(u, 5); }) == Approx(1.0 / 6.0));

  // fractional exponents: int u^{k+1.5} (1-u)^{2.5} du = B(k+2.5, 3.5)
  OrthoRecurrence rec = jacobi_recurrence01(2.5, 1.5, 16);
  CHECK(rec.b[0] == Approx(beta_fn(2.5, 3.5)));
  Rule1D r8 = gauss_rule(rec, 8);
  for (int k = 0; k <= 10; ++k) {
    double got = 0.0;
    for (size_t i = 0; i < r8.x.size(); ++i) got += r8.w[i] * std::pow(r8.x[i], k);
    CHECK(got == Approx(beta_fn(k + 2.5, 3.5)).epsilon(1e-13));
  }
  for (size_t i = 0; i < r8.x.size(); ++i) {
    CHECK(r8.x[i] > 0.0);
    CHECK(r8.x[i] < 1.0);
    CHECK(r8.w[i] > 0.0);
  }
}

TEST_CASE("orthonormal family: unit norms, orthogonality, recurrence depth") {
  const double gamma = 1.7, m = 3.0;
  const int maxdeg = 6, nodes = 8;
  OrthoRecurrence rec = jacobi_recurrence01(gamma, m, maxdeg + 2);
  Rule1D rule = gauss_rule(jacobi_recurrence01(gamma, m, nodes), nodes);

  std::vector<std::vector<double>> vals(rule.x.size(), std::vector<double>(maxdeg + 1));
  for (size_t i = 0; i < rule.x.size(); ++i)
    eval_orthonormal(rec, maxdeg, rule.x[i], vals[i].data());

  for (int j = 0; j <= maxdeg; ++j)
    for (int k = 0; k <= maxdeg; ++k) {
      double g = 0.0;
      for (size_t i = 0; i < rule.x.size(); ++i) g += rule.w[i] * vals[i][j] * vals[i][k];
      CHECK(g == Approx(j == k ? 1.0 : 0.0).epsilon(1e-11).scale(1.0));
    }

  // phi_0 = 1/sqrt(mu0)
  double phi0[1];
  eval_orthonormal(rec, 0, 0.37, phi0);
  CHECK(phi0[0] == Approx(1.0 / std::sqrt(rec.b[0])));
}

TEST_CASE("gauss nodes interlace and stay inside (0,1)") {
  OrthoRecurrence rec = jacobi_recurrence01(0.5, 2.0, 24);
  Rule1D a = gauss_rule(rec, 11);
  Rule1D b = gauss_rule(rec, 12);
  for (int i = 0; i + 1 < 11; ++i) CHECK(a.x[i] < a.x[i + 1]);
  for (int i = 0; i < 11; ++i) {
    CHECK(b.x[i] < a.x[i]);
    CHECK(a.x[i] < b.x[i + 1]);
  }
}
