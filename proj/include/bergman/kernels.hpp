#pragma once

#include "bergman/measure.hpp"

// Reproducing kernels of L^2_a(B_n, dv_gamma), the Berezin transform, mean
// oscillation MO_gamma and its decay-weighted generalization MO_{gamma,i},
// and per-cell means / oscillations.
//
// Berezin integrals are computed through the Mobius substitution
//   B(f)(z) = int f(phi_z(u)) dv_gamma(u),
// which replaces the near-boundary kernel blow-up by a bounded integrand.
// A direct-kernel quadrature survives as a cross-check path, and for n = 1
// polynomial symbols there is a closed-form series in t = |z|^2 that stays
// accurate arbitrarily close to the boundary.

namespace bergman {

// K_gamma(z, w) = (1 - <z, w>)^{-(n+1+gamma)}.
complexd kernel(const WeightedMeasure& meas, const Point& z, const Point& w);
complexd kernel1(const WeightedMeasure& meas, complexd z, complexd w);

// k_z(w) = (1-|z|^2)^{m/2} / (1 - <w, z>)^m, unit L^2(dv_gamma) norm.
complexd normalized_kernel(const WeightedMeasure& meas, const Point& z, const Point& w);

// Generalized kernel k_z^{gamma,i}(w) = (1-|z|^2)^{m/2+i} / (1 - <w,z>)^{m+i}.
complexd generalized_kernel(const WeightedMeasure& meas, const Point& z, const Point& w,
                            int i);

// Berezin transform of a generic integrand.
IntegralResult berezin(const std::function<complexd(const Point&)>& f,
                       const WeightedMeasure& meas, const Point& z,
                       const QuadratureSpec& spec = {});

// Berezin transform of a polynomial symbol.  n = 1 picks the closed-form
// series when |z|^2 > series_threshold (quadrature otherwise); n >= 2 is
// seeded Monte Carlo.
IntegralResult berezin(const Symbol& f, const WeightedMeasure& meas, const Point& z,
                       const QuadratureSpec& spec = {});

// Closed-form series route, n = 1 only: exact up to a controlled tail at
// any interior z.
complexd berezin_series1(const Symbol& f, double gamma, complexd z,
                         double tail_tol = 1e-15);

// Direct-kernel quadrature (no substitution), n = 1: cross-check only.
IntegralResult berezin_direct1(const std::function<complexd(complexd)>& f,
                               double gamma, complexd z,
                               const QuadratureSpec& spec = {});

// MO_gamma(f)(z) = { B(|f|^2)(z) - |B(f)(z)|^2 }^{1/2}.  Radicands in
// [-1e-12 * scale, 0) clamp to zero; anything more negative throws.
double mean_oscillation(const Symbol& f, const WeightedMeasure& meas, const Point& z,
                        const QuadratureSpec& spec = {});

// MO_{gamma,i}(f)(z) = inf_c ||(f - c) k_z^{gamma,i}||, evaluated at the
// least-squares optimum.  i = 0 coincides with mean_oscillation.
double generalized_mean_oscillation(const Symbol& f, const WeightedMeasure& meas,
                                    const Point& z, int i,
                                    const QuadratureSpec& spec = {});

// gamma = 0, n = 1 closed form: MO(zbar)(w)^2 = (1-t)^2 (-(t + ln(1-t))) / t^2
// at t = |w|^2, with the series limit 1/2 at t = 0.
double mo_zbar_sq_oracle(double t);

struct CellStats {
  complexd mean;        // f_E
  double oscillation;   // V(f; E)
  double mass;          // v_gamma(E)
};

// f_E = (1/v_gamma(E)) int_E f and V(f;E)^2 = (1/v_gamma(E)) int_E |f - f_E|^2.
// Exact (incomplete-beta) for polar-box regions; quadrature otherwise.
CellStats cell_statistics(const Symbol& f, const Region& E, const WeightedMeasure& meas,
                          const QuadratureSpec& spec = {});

struct FloorCheck {
  double lhs;     // MO_gamma(f)(z)
  double rhs;     // 2^{-m} (1-|z|^2)^{m/2} inf_alpha ||f - alpha||
  double margin;  // lhs - rhs
};

// Pointwise lower bound for the oscillation of a non-constant symbol; the
// infimum is attained at alpha = int f dv_gamma.
FloorCheck mo_floor_check(const Symbol& f, const WeightedMeasure& meas, const Point& z,
                          const QuadratureSpec& spec = {});

}  // namespace bergman
