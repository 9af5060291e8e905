#include <doctest.h>

#include <cmath>

#include "bergman/geometry.hpp"

using namespace bergman;
using doctest::Approx;

TEST_CASE("herm_dot is linear in the first slot, conjugate in the second") {
  Point z{complexd(0, 1), complexd(2, 0)};
  Point w{complexd(1, 0), complexd(0, 1)};
  complexd d = herm_dot(z, w);
  CHECK(d.real() == Approx(0.0));
  CHECK(d.imag() == Approx(-1.0));  // i*1 + 2*conj(i) = i - 2i
  CHECK(norm_sq(z) == Approx(5.0));
}

TEST_CASE("clamp_radicand tolerates only tiny negatives") {
  CHECK(clamp_radicand(2.0) == 2.0);
  CHECK(clamp_radicand(-1e-13) == 0.0);
  CHECK_THROWS_AS(clamp_radicand(-1e-11), std::domain_error);
}

TEST_CASE("interior test rejects the boundary") {
  CHECK(is_interior(Point{complexd(0.5, 0)}));
  CHECK_FALSE(is_interior(Point{complexd(1.0, 0)}));
  CHECK_THROWS_AS(require_interior(Point{complexd(0, 1)}, "test"), std::domain_error);
}

TEST_CASE("mobius map: special values and involution") {
  // n = 1 closed form (a - z) / (1 - z conj(a))
  CHECK(mobius1(0.5, 0.2).real() == Approx(1.0 / 3.0));
  CHECK(mobius1(0.5, 0.2).imag() == Approx(0.0));

  Point a{complexd(0.3, 0.2), complexd(-0.1, 0.4)};
  Point z{complexd(-0.2, 0.1), complexd(0.3, -0.3)};

  Point img0 = mobius_map(a, Point{complexd(0, 0), complexd(0, 0)});
  CHECK(img0[0].real() == Approx(a[0].real()));
  CHECK(img0[1].imag() == Approx(a[1].imag()));

  Point imga = mobius_map(a, a);
  CHECK(norm(imga) == Approx(0.0).epsilon(1e-12));

  Point twice = mobius_map(a, mobius_map(a, z));
  CHECK(twice[0].real() == Approx(z[0].real()));
  CHECK(twice[0].imag() == Approx(z[0].imag()));
  CHECK(twice[1].real() == Approx(z[1].real()));
  CHECK(twice[1].imag() == Approx(z[1].imag()));

  // matches the scalar fast path at n = 1
  Point s = mobius_map(Point{complexd(0.4, -0.3)}, Point{complexd(-0.1, 0.25)});
  complexd s1 = mobius1(complexd(0.4, -0.3), complexd(-0.1, 0.25));
  CHECK(s[0].real() == Approx(s1.real()));
  CHECK(s[0].imag() == Approx(s1.imag()));
}

TEST_CASE("bergman distance: atanh normalization and invariance") {
  CHECK(bergman_distance1(0.0, 0.6) == Approx(std::log(2.0)));  // atanh(0.6)
  CHECK(bergman_distance1(complexd(0.3, 0.1), complexd(0.3, 0.1)) == Approx(0.0));

  Point z{complexd(0.25, -0.1), complexd(0.3, 0.2)};
  Point w{complexd(-0.4, 0.05), complexd(0.1, -0.5)};
  const double d = bergman_distance(z, w);
  CHECK(d == Approx(bergman_distance(w, z)));

  // agrees with atanh |phi_z(w)| computed the naive way
  CHECK(d == Approx(std::atanh(norm(mobius_map(z, w)))));

  // Mobius invariance
  Point a{complexd(0.2, 0.3), complexd(-0.35, 0.1)};
  CHECK(bergman_distance(mobius_map(a, z), mobius_map(a, w)) == Approx(d));

  // triangle inequality on a fixed triple
  Point v{complexd(0.0, 0.6), complexd(-0.2, 0.0)};
  CHECK(bergman_distance(z, w) <= bergman_distance(z, v) + bergman_distance(v, w) + 1e-12);
}

TEST_CASE("bergman distance is finite and symmetric close to the boundary") {
  complexd z(1.0 - 1e-12, 0.0);
  complexd w = (1.0 - 2e-12) * std::exp(complexd(0, 1e-6));
  const double d = bergman_distance1(z, w);
  CHECK(std::isfinite(d));
  CHECK(d == Approx(bergman_distance1(w, z)));
  CHECK(d > 0.0);
}

TEST_CASE("non-isotropic boundary metric") {
  Point e1{complexd(1, 0)};
  Point me1{complexd(-1, 0)};
  Point ie1{complexd(0, 1)};
  CHECK(nonisotropic_distance(e1, me1) == Approx(std::sqrt(2.0)));
  CHECK(nonisotropic_distance(e1, ie1) == Approx(std::pow(2.0, 0.25)));
  CHECK(nonisotropic_distance(e1, e1) == Approx(0.0));
  CHECK(nonisotropic_distance1(complexd(1, 0), complexd(0, 1)) ==
        Approx(std::pow(2.0, 0.25)));
}

TEST_CASE("radial projection lands on the Bergman sphere") {
  Point p = radial_project(Point{complexd(0.1, 0)}, std::log(2.0));
  CHECK(p[0].real() == Approx(0.6));  // tanh(ln 2) = 3/5
  CHECK(p[0].imag() == Approx(0.0));

  Point q = radial_project(Point{complexd(0.3, 0.4), complexd(0, -0.5)}, 1.25);
  CHECK(norm(q) == Approx(std::tanh(1.25)));
  CHECK(bergman_distance(Point{complexd(0, 0), complexd(0, 0)}, q) == Approx(1.25));
  // direction preserved
  CHECK((q[0] / q[1]).real() == Approx((complexd(0.3, 0.4) / complexd(0, -0.5)).real()));

  CHECK_THROWS_AS(radial_project(Point{complexd(0, 0)}, 1.0), std::domain_error);
}

TEST_CASE("carleson membership") {
  Point apex{complexd(0.5, 0)};
  CHECK(carleson_contains(apex, 1.0, Point{complexd(0.9, 0)}));        // |1-0.9| <= 0.5
  CHECK_FALSE(carleson_contains(apex, 1.0, Point{complexd(-0.9, 0)}));  // 1.9 > 0.5
  CHECK(carleson_contains(apex, 4.0, Point{complexd(-0.9, 0)}));
}

TEST_CASE("cap area function L: closed forms and limits") {
  // n = 1: L(r) = (2/pi) asin(r^2/2) / r^2
  CHECK(cap_L(1, 1.0) == Approx(1.0 / 3.0));
  CHECK(cap_L(1, std::sqrt(2.0)) == Approx(0.5));
  CHECK(cap_L(1, 1e-6) == Approx(1.0 / M_PI));

  // small-r limit L(0) = Gamma(n+1) / (4 Gamma(n/2+1)^2)
  double err = 0.0;
  CHECK(cap_L(2, 1e-4, &err) == Approx(0.5).epsilon(1e-6));
  CHECK(err < 1e-6);
  CHECK(cap_L(3, 1e-4) == Approx(8.0 / (3.0 * M_PI)).epsilon(1e-6));

  // whole sphere: sigma = 1, so L(sqrt 2) = 2^{-n}
  CHECK(cap_L(2, std::sqrt(2.0)) == Approx(0.25).epsilon(1e-7));
  CHECK(cap_L(3, std::sqrt(2.0)) == Approx(0.125).epsilon(1e-7));

  CHECK(cap_sigma(1, 1.0) == Approx(1.0 / 3.0));
  CHECK(cap_sigma(2, std::sqrt(2.0)) == Approx(1.0).epsilon(1e-7));

  CHECK_THROWS_AS(cap_L(1, 1.5), std::domain_error);
  CHECK_THROWS_AS(cap_L(1, 0.0), std::domain_error);
}
