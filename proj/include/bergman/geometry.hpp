#pragma once

#include <complex>
#include <stdexcept>
#include <vector>

// Geometry of the unit ball B_n in C^n: Hermitian pairing, Mobius
// automorphisms, the Bergman (hyperbolic) metric normalized so that
// d(0, z) = atanh|z|, the non-isotropic boundary metric
// beta(u, v) = |1 - u.v|^{1/2}, radial projection onto Bergman spheres,
// Carleson-type boundary sets, and the normalized spherical-cap area
// function L(r) = sigma(B_r) / r^{2n}.

namespace bergman {

using complexd = std::complex<double>;
using Point = std::vector<complexd>;

// Points with |z| >= 1 - kBoundaryTol are rejected as domain errors.
inline constexpr double kBoundaryTol = 1e-14;

// Tiny negative radicands (>= -kRadicandTol) are clamped to zero before
// sqrt; anything more negative is a hard error.
inline constexpr double kRadicandTol = 1e-12;

double clamp_radicand(double x);

// sum_i z_i * conj(w_i); linear in the first slot, conjugate-linear in
// the second.
complexd herm_dot(const Point& z, const Point& w);

double norm_sq(const Point& z);
double norm(const Point& z);

bool is_interior(const Point& z);
void require_interior(const Point& z, const char* where);

// phi_a(z), the involutive automorphism of B_n exchanging a and 0.
Point mobius_map(const Point& a, const Point& z);

// d(z, w) = atanh |phi_z(w)|, evaluated through the identity
// 1 - |phi_z(w)|^2 = (1 - |z|^2)(1 - |w|^2) / |1 - <z, w>|^2
// which is stable near the boundary.
double bergman_distance(const Point& z, const Point& w);

// beta(u, v) = |1 - <u, v>|^{1/2}; a metric on the unit sphere.
double nonisotropic_distance(const Point& u, const Point& v);

// Point at Bergman distance r from the origin in the direction of z,
// i.e. tanh(r) z/|z|.  z = 0 is a domain error.
Point radial_project(const Point& z, double r);

// Carleson set with apex direction z/|z| and aperture rho:
// V = { w : |1 - <w, z/|z|>| <= rho (1 - |z|) }.  Membership test.
bool carleson_contains(const Point& apex, double rho, const Point& w);

// sigma(B_r(zeta)) for the metric balls of beta on the unit sphere,
// sigma normalized, 0 < r <= sqrt(2).
double cap_sigma(int n, double r);

// L(r) = sigma(B_r) / r^{2n}.  Closed form for n = 1; planar quadrature
// over the unit disk for n >= 2 (abs_err, if given, receives a
// difference-of-orders error estimate).
double cap_L(int n, double r, double* abs_err = nullptr);

// --- scalar n = 1 fast paths (same formulas, no allocation) ---

inline complexd mobius1(complexd a, complexd z) {
  return (a - z) / (1.0 - z * std::conj(a));
}

double bergman_distance1(complexd z, complexd w);

inline double nonisotropic_distance1(complexd u, complexd v) {
  return std::sqrt(std::abs(1.0 - u * std::conj(v)));
}

}  // namespace bergman
