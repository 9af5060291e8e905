#include <doctest.h>

#include <cmath>

#include "bergman/measure.hpp"

using namespace bergman;
using doctest::Approx;

TEST_CASE("normalizing constant and moments") {
  CHECK(normalizing_constant({1, 0.0}) == Approx(1.0 / M_PI));
  CHECK(normalizing_constant({2, 1.5}) == Approx(8.75 / (M_PI * M_PI)));

  // n = 1: m_k = k! Gamma(gamma+2) / Gamma(k+gamma+2)
  for (int k = 0; k <= 6; ++k)
    CHECK(moment({1, 0.0}, k) == Approx(1.0 / (k + 1)));
  CHECK(moment({1, 1.0}, 1) == Approx(1.0 / 3.0));
  CHECK(moment({2, 0.0}, 1) == Approx(2.0 / 3.0));
  CHECK(moment({3, 0.5}, 0) == Approx(1.0));

  CHECK_THROWS_AS(require_valid({1, -1.0}), std::domain_error);
  CHECK_THROWS_AS(require_valid({0, 0.0}), std::domain_error);
}

TEST_CASE("monomial inner products") {
  WeightedMeasure m1{1, 0.0};
  // <z^2 zbar, z> = 2! Gamma(2) / Gamma(4) = 1/3
  CHECK(monomial_inner1(m1, 2, 1, 1, 0) == Approx(1.0 / 3.0));
  // charge mismatch
  CHECK(monomial_inner1(m1, 2, 0, 1, 0) == 0.0);
  // <z, z> = m_1
  CHECK(monomial_inner1(m1, 1, 0, 1, 0) == Approx(0.5));
  CHECK(monomial_inner1({1, 2.0}, 1, 0, 1, 0) == Approx(moment({1, 2.0}, 1)));

  WeightedMeasure m2{2, 0.0};
  // <z1 z2, z1 z2> = 1!1! Gamma(3)/Gamma(5) = 1/12
  CHECK(monomial_inner(m2, {1, 1}, {0, 0}, {1, 1}, {0, 0}) == Approx(1.0 / 12.0));
  CHECK(monomial_inner(m2, {2, 0}, {0, 0}, {0, 2}, {0, 0}) == 0.0);
}

TEST_CASE("exact polynomial integrals") {
  WeightedMeasure m1{1, 0.0};
  Symbol abs2 = Symbol::monomial1(1, 1);
  CHECK(ball_integral(abs2, m1).real() == Approx(0.5));
  CHECK(std::abs(ball_integral(Symbol::monomial1(1, 0), m1)) == Approx(0.0));

  Symbol z2 = Symbol::monomial1(2, 0);
  CHECK(symbol_inner(z2, z2, m1).real() == Approx(1.0 / 3.0));

  WeightedMeasure m2{2, 1.0};
  Symbol f = Symbol::monomial({1, 0}, {1, 0});  // |z1|^2
  // <z1, z1> = 1! Gamma(4)/Gamma(5) = 1/4; twice this is moment(m2, 1)
  CHECK(ball_integral(f, m2).real() == Approx(0.25));
  CHECK(2.0 * ball_integral(f, m2).real() == Approx(moment(m2, 1)));
}

TEST_CASE("deterministic quadrature matches exact moments") {
  WeightedMeasure meas{1, 2.5};
  QuadratureSpec spec;
  Region ball = Region::whole_ball();
  for (int k = 1; k <= 10; k += 3) {
    auto res = integrate1([k](complexd z) { return complexd(std::pow(std::norm(z), k)); },
                          ball, meas, spec);
    CHECK(res.value.real() == Approx(moment(meas, k)).epsilon(1e-12));
    CHECK(res.abs_err < 1e-12);
  }
  // pure charge integrates to zero
  auto osc = integrate1([](complexd z) { return z * z * std::conj(z); }, ball, meas, spec);
  CHECK(std::abs(osc.value) < 1e-13);

  // non-polynomial radial profile, gamma = 0: int 1/(1 - u/2) du = 2 ln 2
  auto res = integrate1([](complexd z) { return complexd(1.0 / (1.0 - 0.5 * std::norm(z))); },
                        ball, {1, 0.0}, spec);
  CHECK(res.value.real() == Approx(2.0 * std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("truncated ball and complement") {
  WeightedMeasure meas{1, 0.0};
  QuadratureSpec spec;
  auto one = [](complexd) { return complexd(1.0); };

  Region trunc = Region::truncated_ball(0.25);
  auto v = integrate1(one, trunc, meas, spec);
  CHECK(v.value.real() == Approx(0.5625).epsilon(1e-10));  // (1-eps)^2 at gamma = 0

  Region inner = Region::truncated_ball(0.5);
  Region comp = Region::complement(inner);
  auto c = integrate1(one, comp, meas, spec);
  CHECK(c.value.real() == Approx(1.0 - 0.25).epsilon(1e-10));

  CHECK(trunc.contains1(complexd(0.74, 0)));
  CHECK_FALSE(trunc.contains1(complexd(0.76, 0)));
  CHECK(comp.contains1(complexd(0.7, 0)));
  CHECK_FALSE(comp.contains1(complexd(0.3, 0)));
}

TEST_CASE("polar box regions: membership, quadrature, closed forms") {
  std::vector<PolarBox> boxes{{0.1, 0.5, 0.3, 1.1}};
  Region reg = Region::polar_boxes(boxes);

  CHECK(reg.contains1(std::sqrt(0.3) * std::exp(complexd(0, 0.7))));
  CHECK_FALSE(reg.contains1(std::sqrt(0.6) * std::exp(complexd(0, 0.7))));
  CHECK_FALSE(reg.contains1(std::sqrt(0.3) * std::exp(complexd(0, 1.2))));

  // wraparound: a box straddling angle 0
  Region wrap = Region::polar_boxes({{0.0, 0.9, -0.5, 0.5}});
  CHECK(wrap.contains1(0.5 * std::exp(complexd(0, 0.2))));
  CHECK(wrap.contains1(0.5 * std::exp(complexd(0, -0.2))));
  CHECK_FALSE(wrap.contains1(complexd(-0.5, 0)));

  WeightedMeasure meas{1, 1.0};
  Symbol f = Symbol::monomial1(2, 1) + Symbol::monomial1(1, 1, complexd(0.3));
  auto quad = integrate1([&f](complexd z) { return f.eval1(z); }, reg, meas, {});
  complexd exact = symbol_box_integral(f, boxes, meas);
  CHECK(std::abs(quad.value - exact) < 1e-10);

  // full annulus with all angles = full-ball integral
  std::vector<PolarBox> full{{0.0, 1.0, 0.0, 2.0 * M_PI}};
  complexd whole = symbol_box_integral(Symbol::monomial1(1, 1), full, meas);
  CHECK(whole.real() == Approx(moment(meas, 1)));
  CHECK(whole.imag() == Approx(0.0));
}

TEST_CASE("radial box integral handles half-integral powers") {
  CHECK(radial_box_integral(1.0, 0.0, 0.0, 1.0) == Approx(0.25));  // (1/2) B(2,1)
  CHECK(radial_box_integral(0.5, 0.0, 0.0, 1.0) == Approx(1.0 / 3.0));
  CHECK(radial_box_integral(0.5, 0.0, 0.0, 0.49) ==
        Approx(0.5 * (2.0 / 3.0) * std::pow(0.49, 1.5)));
  const double whole = radial_box_integral(2.0, 1.5, 0.0, 1.0);
  CHECK(radial_box_integral(2.0, 1.5, 0.0, 0.3) +
            radial_box_integral(2.0, 1.5, 0.3, 1.0) ==
        Approx(whole));
}

TEST_CASE("invariant measure tau") {
  // tau(|z| < R) = V_n (R^2/(1-R^2))^n
  WeightedMeasure m1{1, 0.0};
  Region half = Region::truncated_ball(1.0 - std::sqrt(0.5));
  CHECK(tau_measure(half, m1) == Approx(M_PI));

  WeightedMeasure m2{2, 0.7};
  CHECK(tau_measure(Region::truncated_ball(1.0 - std::sqrt(0.5)), m2) ==
        Approx(M_PI * M_PI / 2.0));

  // box with the same trace: u in [0, 1/2], all angles
  Region boxed = Region::polar_boxes({{0.0, 0.5, 0.0, 2.0 * M_PI}});
  CHECK(tau_measure(boxed, m1) == Approx(M_PI));

  // Monte Carlo membership path against the closed form (n = 2)
  Region ball_half = Region::membership(
      [](const Point& z) { return norm_sq(z) <= 0.25; }, 0.4);
  QuadratureSpec spec;
  spec.mc_samples = 400000;
  const double exact = M_PI * M_PI / 18.0;  // V_2 ((1/4)/(3/4))^2
  CHECK(tau_measure(ball_half, m2, spec) == Approx(exact).epsilon(0.05));

  CHECK(std::isinf(tau_measure(Region::whole_ball(), m1)));
}

TEST_CASE("monte carlo integration at n = 2") {
  WeightedMeasure meas{2, 0.0};
  QuadratureSpec spec;
  spec.mc_samples = 300000;
  Region ball = Region::whole_ball();

  auto total = integrate([](const Point&) { return complexd(1.0); }, ball, meas, spec);
  CHECK(total.value.real() == Approx(1.0));
  CHECK(total.abs_err < 1e-12);

  auto sq = integrate([](const Point& z) { return complexd(norm_sq(z)); }, ball, meas, spec);
  CHECK(sq.value.real() == Approx(2.0 / 3.0).epsilon(0.01));
  CHECK(std::abs(sq.value.real() - 2.0 / 3.0) < 5.0 * sq.abs_err);

  // seeded: same spec, same answer
  auto sq2 = integrate([](const Point& z) { return complexd(norm_sq(z)); }, ball, meas, spec);
  CHECK(sq.value.real() == sq2.value.real());

  // n = 1 dispatch through the Point interface hits the deterministic rule
  auto det = integrate([](const Point& z) { return complexd(norm_sq(z)); }, ball,
                       {1, 0.0}, {});
  CHECK(det.value.real() == Approx(0.5).epsilon(1e-12));
}
