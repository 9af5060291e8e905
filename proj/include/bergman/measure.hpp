#pragma once

#include <cstdint>
#include <functional>
#include <memory>

#include "bergman/quadrature.hpp"
#include "bergman/symbol.hpp"

// The weighted volume measure dv_gamma = c_gamma (1 - |z|^2)^gamma dv on
// B_n with c_gamma = Gamma(n+1+gamma) / (pi^n Gamma(gamma+1)), so that
// v_gamma(B_n) = 1, together with regions of integration, deterministic
// n = 1 quadrature (Gauss-Jacobi radially in u = |z|^2, equispaced
// trapezoid in angle), Monte Carlo for n >= 2, and the invariant measure
// dtau = (1 - |z|^2)^{-n-1} dv.

namespace bergman {

struct WeightedMeasure {
  int n = 1;
  double gamma = 0.0;  // must be > -1
};

void require_valid(const WeightedMeasure& meas);

// c_gamma
double normalizing_constant(const WeightedMeasure& meas);

// int_{B_n} |z|^{2k} dv_gamma; for n = 1 this is the moment
// m_k = k! Gamma(gamma+2) / Gamma(k+gamma+2).
double moment(const WeightedMeasure& meas, int k);

// <z^a zbar^b, z^c zbar^d> in L^2(dv_gamma): nonzero iff a + d = b + c
// componentwise, in which case it equals e! Gamma(n+1+gamma) /
// Gamma(n+1+gamma+|e|) with e = a + d.
double monomial_inner(const WeightedMeasure& meas, const MultiIndex& a,
                      const MultiIndex& b, const MultiIndex& c,
                      const MultiIndex& d);
// n = 1 scalar convenience.
double monomial_inner1(const WeightedMeasure& meas, int a, int b, int c, int d);

// Exact int_{B_n} f dv_gamma for polynomial symbols.
complexd ball_integral(const Symbol& f, const WeightedMeasure& meas);
// Exact L^2(dv_gamma) pairing <f, g> = int f conj(g) dv_gamma.
complexd symbol_inner(const Symbol& f, const Symbol& g, const WeightedMeasure& meas);

// Polar box in the coordinates u = |z|^2, theta = arg z (n = 1 only).
struct PolarBox {
  double u1, u2;    // 0 <= u1 <= u2 < 1
  double th1, th2;  // th1 <= th2, th2 - th1 <= 2 pi
};

class Region {
 public:
  enum class Kind { TruncatedBall, Boxes, Membership, Complement };

  // |z| <= 1 - eps (eps = 0: the whole open ball).
  static Region whole_ball();
  static Region truncated_ball(double eps);
  // Union of polar boxes, n = 1.  Assumed pairwise disjoint.
  static Region polar_boxes(std::vector<PolarBox> boxes);
  // Generic membership predicate restricted to |z| <= 1 - eps (n >= 2
  // regions such as unions of tree cells).
  static Region membership(std::function<bool(const Point&)> member, double eps = 0.0);
  // (truncated ball) \ inner; inner must be contained in the truncated ball.
  static Region complement(Region inner, double eps = 0.0);

  Kind kind() const { return kind_; }
  double eps() const { return eps_; }
  const std::vector<PolarBox>& boxes() const { return boxes_; }
  const Region& inner() const { return *inner_; }

  bool contains(const Point& z) const;
  bool contains1(complexd z) const;

 private:
  Kind kind_ = Kind::TruncatedBall;
  double eps_ = 0.0;
  std::vector<PolarBox> boxes_;
  std::function<bool(const Point&)> member_;
  std::shared_ptr<const Region> inner_;
};

struct QuadratureSpec {
  // The deterministic n = 1 rule uses radial_order + 1 Gauss nodes in
  // u = |z|^2 (exact for u-polynomials of degree <= 2 radial_order + 1)
  // and angular_order equispaced angle samples (kills charges q with
  // 0 < |q| < angular_order).
  int radial_order = 48;
  int angular_order = 160;
  long mc_samples = 200000;  // n >= 2
  std::uint64_t seed = 12345;
};

struct IntegralResult {
  complexd value;
  // Deterministic path: |value - refined-order value|.  Monte Carlo path:
  // half-width of the 95% confidence interval.
  double abs_err;
};

// int_region f dv_gamma.  n = 1: deterministic quadrature; n >= 2: Monte
// Carlo with fixed seed.
IntegralResult integrate(const std::function<complexd(const Point&)>& f,
                         const Region& region, const WeightedMeasure& meas,
                         const QuadratureSpec& spec);

// Scalar n = 1 entry point (identical rule, no allocation per sample).
IntegralResult integrate1(const std::function<complexd(complexd)>& f,
                          const Region& region, const WeightedMeasure& meas,
                          const QuadratureSpec& spec);

// Exact integral of a polynomial symbol over a polar-box union (n = 1):
// incomplete-beta radial factors times closed-form angular factors.
complexd symbol_box_integral(const Symbol& f, const std::vector<PolarBox>& boxes,
                             const WeightedMeasure& meas);

// Radial factor (1/2) int_{u1}^{u2} u^s (1-u)^gamma du used by the box
// integrals; s may be half-integral.
double radial_box_integral(double s, double gamma, double u1, double u2);

// tau(region) for dtau = (1-|z|^2)^{-n-1} dv.  Closed form for truncated
// balls (V_n (R^2/(1-R^2))^n) and n = 1 box unions; Monte Carlo for
// membership regions bounded away from the boundary (eps > 0).
double tau_measure(const Region& region, const WeightedMeasure& meas,
                   const QuadratureSpec& spec = {});

}  // namespace bergman
