#include <doctest.h>

#include <cmath>

#include "bergman/kernels.hpp"

using namespace bergman;
using doctest::Approx;

namespace {
const WeightedMeasure kDisk{1, 0.0};

Point pt(complexd z) { return Point{z}; }
}  // namespace

TEST_CASE("reproducing kernel values and symmetry") {
  CHECK(kernel(kDisk, pt(complexd(0.3, 0.2)), pt(complexd(0, 0))).real() == Approx(1.0));
  CHECK(kernel(kDisk, pt(complexd(0.5, 0)), pt(complexd(0.5, 0))).real() ==
        Approx(16.0 / 9.0));
  CHECK(kernel1(kDisk, complexd(0.5, 0), complexd(0.5, 0)).real() == Approx(16.0 / 9.0));

  WeightedMeasure m2{2, 1.3};
  Point z{complexd(0.3, -0.2), complexd(0.1, 0.4)};
  Point w{complexd(-0.25, 0.15), complexd(0.35, 0.1)};
  complexd kzw = kernel(m2, z, w);
  complexd kwz = kernel(m2, w, z);
  CHECK(std::abs(kzw - std::conj(kwz)) < 1e-13);
}

TEST_CASE("normalized kernel: unit norm and diagonal value") {
  CHECK(normalized_kernel(kDisk, pt(complexd(0, 0)), pt(complexd(0.7, -0.2))).real() ==
        Approx(1.0));

  WeightedMeasure meas{1, 1.5};
  const complexd z0(0.55, -0.3);
  auto nrm = integrate1(
      [&](complexd w) { return complexd(std::norm(normalized_kernel(meas, pt(z0), pt(w)))); },
      Region::whole_ball(), meas, {});
  CHECK(nrm.value.real() == Approx(1.0).epsilon(1e-10));

  const double m = 2.0 + meas.gamma;
  CHECK(std::norm(normalized_kernel(meas, pt(z0), pt(z0))) ==
        Approx(std::pow(1.0 - std::norm(z0), -m)));

  // i = 0 generalized kernel is the normalized kernel
  complexd a = generalized_kernel(meas, pt(z0), pt(complexd(0.2, 0.6)), 0);
  complexd b = normalized_kernel(meas, pt(z0), pt(complexd(0.2, 0.6)));
  CHECK(std::abs(a - b) < 1e-14);
}

TEST_CASE("berezin transform: constants, center value, harmonicity oracle") {
  Symbol f = Symbol::monomial1(1, 1);  // |z|^2
  auto at0 = berezin(f, kDisk, pt(complexd(0, 0)));
  CHECK(at0.value.real() == Approx(0.5).epsilon(1e-12));  // m_1

  Symbol c = Symbol::constant(1, complexd(2.0, -1.0));
  auto bc = berezin(c, kDisk, pt(complexd(0.4, 0.3)));
  CHECK(bc.value.real() == Approx(2.0).epsilon(1e-12));
  CHECK(bc.value.imag() == Approx(-1.0).epsilon(1e-12));

  // B_0(zbar)(w) = wbar, quadrature branch and series branch
  Symbol zbar = Symbol::monomial1(0, 1);
  for (complexd w : {complexd(0.3, -0.5), complexd(0.85, 0.35), complexd(-0.97, 0.01)}) {
    auto bw = berezin(zbar, kDisk, pt(w));
    CHECK(std::abs(bw.value - std::conj(w)) < 1e-10);
  }
}

TEST_CASE("berezin reproduces holomorphic polynomials") {
  Symbol g = Symbol::monomial1(3, 0) + Symbol::monomial1(1, 0, complexd(0, -2.0)) +
             Symbol::constant(1, 1.0) + Symbol::monomial1(6, 0, 0.25);
  WeightedMeasure meas{1, 0.8};
  for (complexd z : {complexd(0.2, 0.5), complexd(-0.6, 0.1), complexd(0.9, -0.3)}) {
    auto bz = berezin(g, meas, pt(z));
    CHECK(std::abs(bz.value - g.eval1(z)) < 1e-10);
  }
}

TEST_CASE("series, quadrature, and direct-kernel routes agree") {
  Symbol f = Symbol::monomial1(2, 1, complexd(1.0, 0.5)) + Symbol::monomial1(0, 2, -0.7) +
             Symbol::monomial1(1, 1, 0.3);
  WeightedMeasure meas{1, 1.2};
  const complexd z(0.62, -0.41);  // t ~ 0.55: quadrature branch
  auto quad = berezin(f, meas, pt(z));
  complexd series = berezin_series1(f, meas.gamma, z);
  CHECK(std::abs(quad.value - series) < 1e-10);

  auto direct = berezin_direct1([&](complexd w) { return f.eval1(w); }, meas.gamma, z);
  CHECK(std::abs(direct.value - series) < 1e-8);
}

TEST_CASE("berezin at n = 2 via monte carlo") {
  WeightedMeasure meas{2, 1.0};
  Symbol f = Symbol::monomial({1, 0}, {1, 0});  // |z1|^2
  Point origin{complexd(0, 0), complexd(0, 0)};
  auto b0 = berezin(f, meas, origin);
  // int |z1|^2 dv_1 over B_2 = 1/4
  CHECK(std::abs(b0.value.real() - 0.25) < 5.0 * b0.abs_err);
  CHECK(b0.abs_err < 0.01);
}

TEST_CASE("mean oscillation: constants, center, closed-form oracle") {
  CHECK(mean_oscillation(Symbol::constant(1, complexd(3, 4)), kDisk,
                         pt(complexd(0.5, 0.2))) == Approx(0.0));

  Symbol zbar = Symbol::monomial1(0, 1);
  CHECK(mean_oscillation(zbar, kDisk, pt(complexd(0, 0))) ==
        Approx(std::sqrt(0.5)).epsilon(1e-10));

  // MO_0(zbar)(w)^2 = (1-t)^2 (-(t+ln(1-t)))/t^2 out to |w| = 0.99
  for (double aw : {0.2, 0.5, 0.8, 0.9, 0.99}) {
    const complexd w = aw * std::exp(complexd(0, 0.77));
    const double got = mean_oscillation(zbar, kDisk, pt(w));
    const double want = std::sqrt(mo_zbar_sq_oracle(aw * aw));
    CHECK(got == Approx(want).epsilon(1e-6));
  }
  CHECK(std::sqrt(mo_zbar_sq_oracle(0.5)) == Approx(0.43948).epsilon(1e-4));
  CHECK(mo_zbar_sq_oracle(0.0) == Approx(0.5));
  CHECK(mo_zbar_sq_oracle(1e-6) == Approx(0.5 - 2e-6 / 3.0).epsilon(1e-9));
}

TEST_CASE("mean oscillation invariances") {
  Symbol f = Symbol::monomial1(1, 2, complexd(0.4, -1.0)) + Symbol::monomial1(2, 0, 0.9);
  WeightedMeasure meas{1, 0.5};
  const Point z = pt(complexd(0.35, 0.55));
  const double base = mean_oscillation(f, meas, z);

  Symbol shifted = f + Symbol::constant(1, complexd(-2.0, 5.0));
  CHECK(mean_oscillation(shifted, meas, z) == Approx(base).epsilon(1e-11));

  const complexd c(1.5, -2.5);
  CHECK(mean_oscillation(f.scaled(c), meas, z) == Approx(std::abs(c) * base).epsilon(1e-11));
}

TEST_CASE("generalized mean oscillation") {
  Symbol zbar = Symbol::monomial1(0, 1);
  WeightedMeasure meas{1, 0.7};

  for (int i : {0, 1, 3})
    CHECK(generalized_mean_oscillation(Symbol::constant(1, 2.0), meas,
                                       pt(complexd(0.3, 0.4)), i) == Approx(0.0));

  // i = 0 coincides with MO
  Symbol f = Symbol::monomial1(2, 1, complexd(0.3, 0.8)) + Symbol::monomial1(0, 1);
  const Point z = pt(complexd(0.45, -0.25));
  CHECK(generalized_mean_oscillation(f, meas, z, 0) ==
        Approx(mean_oscillation(f, meas, z)).epsilon(1e-10));

  // at z = 0 all the weights are trivial: MO_{gamma,i}(zbar)(0) = sqrt(m_1)
  const double m1 = moment(meas, 1);
  CHECK(generalized_mean_oscillation(zbar, meas, pt(complexd(0, 0)), 2) ==
        Approx(std::sqrt(m1)).epsilon(1e-9));

  // decay-weighted MO along a radius: finite, nonnegative (recorded only)
  for (double r : {0.3, 0.6, 0.85}) {
    const double v = generalized_mean_oscillation(zbar, meas, pt(complexd(r, 0)), 2);
    CHECK(std::isfinite(v));
    CHECK(v >= 0.0);
  }
}

TEST_CASE("cell statistics") {
  // constants collapse
  auto cs = cell_statistics(Symbol::constant(1, complexd(1, 1)),
                            Region::truncated_ball(0.3), kDisk);
  CHECK(std::abs(cs.mean - complexd(1, 1)) < 1e-12);
  CHECK(cs.oscillation == Approx(0.0));

  // whole disk, f = |z|^2: mean 1/2, V^2 = m_2 - m_1^2 = 1/12
  auto ball = cell_statistics(Symbol::monomial1(1, 1), Region::whole_ball(), kDisk);
  CHECK(ball.mean.real() == Approx(0.5).epsilon(1e-10));
  CHECK(ball.oscillation == Approx(std::sqrt(1.0 / 12.0)).epsilon(1e-10));
  CHECK(ball.mass == Approx(1.0).epsilon(1e-10));

  // exact box path against the truncated-ball quadrature path on a disk
  Symbol f = Symbol::monomial1(1, 0, complexd(2, 1)) + Symbol::monomial1(1, 1);
  auto by_box = cell_statistics(f, Region::polar_boxes({{0.0, 0.36, 0.0, 2.0 * M_PI}}),
                                kDisk);
  auto by_ball = cell_statistics(f, Region::truncated_ball(0.4), kDisk);
  CHECK(std::abs(by_box.mean - by_ball.mean) < 1e-10);
  CHECK(by_box.oscillation == Approx(by_ball.oscillation).epsilon(1e-9));
  CHECK(by_box.mass == Approx(by_ball.mass).epsilon(1e-10));

  std::vector<PolarBox> boxes{{0.2, 0.6, -0.4, 0.9}};
  auto exact = cell_statistics(f, Region::polar_boxes(boxes), kDisk);

  // variational property: V^2 minimizes the mean square deviation
  const double v2 = exact.oscillation * exact.oscillation;
  for (int k = 0; k < 20; ++k) {
    const complexd c(0.1 * k - 1.0, 0.07 * k);
    Symbol g = f - Symbol::constant(1, c);
    const double trial =
        symbol_box_integral(g * g.conj(), boxes, kDisk).real() / exact.mass;
    CHECK(v2 <= trial + 1e-12);
  }
}

TEST_CASE("oscillation floor bound") {
  auto fc = mo_floor_check(Symbol::constant(1, 5.0), kDisk, pt(complexd(0.2, 0.1)));
  CHECK(fc.lhs == Approx(0.0));
  CHECK(fc.rhs == Approx(0.0));

  Symbol zbar = Symbol::monomial1(0, 1);
  auto f0 = mo_floor_check(zbar, kDisk, pt(complexd(0, 0)));
  CHECK(f0.lhs == Approx(std::sqrt(0.5)).epsilon(1e-10));
  CHECK(f0.rhs == Approx(0.25 * std::sqrt(0.5)).epsilon(1e-10));
  CHECK(f0.margin > 0.0);

  // sweep: margin stays (numerically) nonnegative
  Symbol f = Symbol::monomial1(2, 0, complexd(0.5, 0.2)) + Symbol::monomial1(0, 1, -1.0);
  for (double r : {0.0, 0.35, 0.7, 0.92}) {
    for (double th : {0.0, 1.3, 2.9}) {
      const complexd z = r * std::exp(complexd(0, th));
      auto chk = mo_floor_check(f, WeightedMeasure{1, 1.1}, pt(z));
      CHECK(chk.margin >= -1e-10);
    }
  }
}
