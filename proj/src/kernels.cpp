#include "bergman/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace bergman {

namespace {

double order_m(const WeightedMeasure& meas) { return meas.n + 1.0 + meas.gamma; }

void check_finite(complexd v, const char* where) {
  if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
    throw std::overflow_error(std::string(where) + ": overflow near the boundary");
}

// Quadrature berezin at n = 1 needs enough angular samples to resolve the
// Fourier content of f(phi_z(u)), which decays like |z|^k.
QuadratureSpec adapt_for_mobius(const QuadratureSpec& spec, double abs_z, int degree) {
  QuadratureSpec s = spec;
  if (abs_z > 0.1) {
    const int k = int(std::ceil(36.0 / -std::log(abs_z))) + 2 * degree + 8;
    s.angular_order = std::max(s.angular_order, std::min(k, 20000));
  }
  return s;
}

constexpr double kSeriesThreshold = 0.7;  // on t = |z|^2

}  // namespace

complexd kernel(const WeightedMeasure& meas, const Point& z, const Point& w) {
  require_valid(meas);
  if (int(z.size()) != meas.n || int(w.size()) != meas.n)
    throw std::invalid_argument("kernel: dimension mismatch");
  complexd K = std::pow(1.0 - herm_dot(z, w), -order_m(meas));
  check_finite(K, "kernel");
  return K;
}

complexd kernel1(const WeightedMeasure& meas, complexd z, complexd w) {
  complexd K = std::pow(1.0 - z * std::conj(w), -(2.0 + meas.gamma));
  check_finite(K, "kernel");
  return K;
}

complexd normalized_kernel(const WeightedMeasure& meas, const Point& z, const Point& w) {
  require_interior(z, "normalized_kernel");
  const double m = order_m(meas);
  complexd k = std::pow(1.0 - norm_sq(z), 0.5 * m) * std::pow(1.0 - herm_dot(w, z), -m);
  check_finite(k, "normalized_kernel");
  return k;
}

complexd generalized_kernel(const WeightedMeasure& meas, const Point& z, const Point& w,
                            int i) {
  if (i < 0) throw std::domain_error("generalized_kernel: i must be >= 0");
  require_interior(z, "generalized_kernel");
  const double m = order_m(meas);
  complexd k =
      std::pow(1.0 - norm_sq(z), 0.5 * m + i) * std::pow(1.0 - herm_dot(w, z), -(m + i));
  check_finite(k, "generalized_kernel");
  return k;
}

// ---------------------------------------------------------------- Berezin

IntegralResult berezin(const std::function<complexd(const Point&)>& f,
                       const WeightedMeasure& meas, const Point& z,
                       const QuadratureSpec& spec) {
  require_interior(z, "berezin");
  auto sub = [&](const Point& u) { return f(mobius_map(z, u)); };
  QuadratureSpec s = meas.n == 1 ? adapt_for_mobius(spec, norm(z), 8) : spec;
  return integrate(sub, Region::whole_ball(), meas, s);
}

namespace {

// B(w^a wbar^b)(z) for a >= b, n = 1:
//   (1-t)^m z^{a-b} sum_j C_j C_{j+a-b} m_{a+j} t^j,   t = |z|^2,
// with C_j = Gamma(j+m)/(j! Gamma(m)) and m_k the moments of dv_gamma.
// All factors evolve by rational recurrences in j.
complexd berezin_term_series(int a, int b, double gamma, complexd z, double tol) {
  const double m = 2.0 + gamma;
  const int q = a - b;
  const double t = std::norm(z);
  if (t == 0.0) return (q == 0) ? complexd(moment({1, gamma}, a)) : complexd(0.0);

  // r_0 = C_0 C_q m_a
  double r = std::exp(std::lgamma(q + m) - std::lgamma(q + 1.0) - std::lgamma(m) +
                      std::lgamma(a + 1.0) + std::lgamma(gamma + 2.0) -
                      std::lgamma(a + gamma + 2.0));
  double S = 0.0;
  const long j_max = 50000000;
  for (long j = 0; j < j_max; ++j) {
    S += r;
    const double mult = t * ((j + m) / (j + 1.0)) * ((j + q + m) / (j + q + 1.0)) *
                        ((a + j + 1.0) / (a + j + gamma + 2.0));
    r *= mult;
    if (mult < 1.0 && r / (1.0 - mult) < tol * std::max(S, 1e-300)) {
      S += r / (1.0 - mult);  // geometric tail estimate
      return std::pow(1.0 - t, m) * std::pow(z, q) * S;
    }
  }
  throw std::runtime_error("berezin series did not converge");
}

}  // namespace

complexd berezin_series1(const Symbol& f, double gamma, complexd z, double tail_tol) {
  if (f.dim() != 1) throw std::domain_error("berezin_series1: n = 1 only");
  if (!(std::norm(z) < 1.0)) throw std::domain_error("berezin_series1: z must be interior");
  complexd acc = 0.0;
  for (const auto& term : f.terms()) {
    const int a = term.a[0], b = term.b[0];
    // B(w^a wbar^b) = conj(B(w^b wbar^a)) at the same z
    complexd v = a >= b ? berezin_term_series(a, b, gamma, z, tail_tol)
                        : std::conj(berezin_term_series(b, a, gamma, z, tail_tol));
    acc += term.coeff * v;
  }
  return acc;
}

IntegralResult berezin(const Symbol& f, const WeightedMeasure& meas, const Point& z,
                       const QuadratureSpec& spec) {
  require_valid(meas);
  require_interior(z, "berezin");
  if (f.dim() != meas.n) throw std::invalid_argument("berezin: dimension mismatch");
  if (meas.n == 1) {
    const complexd z1 = z[0];
    const double t = std::norm(z1);
    if (t > kSeriesThreshold) {
      complexd v = berezin_series1(f, meas.gamma, z1);
      double scale = 0.0;
      for (const auto& term : f.terms()) scale += std::abs(term.coeff);
      return {v, 1e-13 * std::max(1.0, scale)};
    }
    QuadratureSpec s = adapt_for_mobius(spec, std::sqrt(t), f.degree());
    auto sub = [&](complexd u) { return f.eval1(mobius1(z1, u)); };
    return integrate1(sub, Region::whole_ball(), meas, s);
  }
  auto sub = [&](const Point& u) { return f.eval(mobius_map(z, u)); };
  return integrate(sub, Region::whole_ball(), meas, spec);
}

IntegralResult berezin_direct1(const std::function<complexd(complexd)>& f, double gamma,
                               complexd z, const QuadratureSpec& spec) {
  if (!(std::norm(z) < 1.0)) throw std::domain_error("berezin_direct1: z must be interior");
  const double m = 2.0 + gamma;
  const double pref = std::pow(1.0 - std::norm(z), m);
  auto integrand = [&](complexd w) {
    return f(w) * pref / std::pow(std::norm(1.0 - w * std::conj(z)), m);
  };
  QuadratureSpec s = adapt_for_mobius(spec, std::abs(z), 8);
  return integrate1(integrand, Region::whole_ball(), {1, gamma}, s);
}

// --------------------------------------------------------- mean oscillation

namespace {

double clamp_mo_sq(double mo2, double scale) {
  if (mo2 >= 0.0) return mo2;
  if (mo2 < -1e-12 * std::max(1.0, scale))
    throw std::runtime_error("mean oscillation: radicand below tolerance");
  return 0.0;
}

}  // namespace

double mean_oscillation(const Symbol& f, const WeightedMeasure& meas, const Point& z,
                        const QuadratureSpec& spec) {
  // MO^2 = B(|f - B(f)(z)|^2)(z): subtracting the mean first avoids the
  // cancellation in B(|f|^2) - |B(f)|^2 near the boundary.
  const complexd c = berezin(f, meas, z, spec).value;
  Symbol g = f - Symbol::constant(meas.n, c);
  const double mo2 = berezin(g * g.conj(), meas, z, spec).value.real();
  double scale = std::norm(c);
  return std::sqrt(clamp_mo_sq(mo2, scale));
}

double generalized_mean_oscillation(const Symbol& f, const WeightedMeasure& meas,
                                    const Point& z, int i, const QuadratureSpec& spec) {
  if (i < 0) throw std::domain_error("generalized_mean_oscillation: i must be >= 0");
  require_interior(z, "generalized_mean_oscillation");
  if (i == 0) return mean_oscillation(f, meas, z, spec);

  // After w = phi_z(u), every integral in the least-squares optimum is an
  // integral against the bounded weight |1 - <u, z>|^{2i} dv_gamma(u).
  auto weight = [&](const Point& u) {
    return std::pow(std::norm(complexd(1.0) - herm_dot(u, z)), double(i));
  };
  Region ball = Region::whole_ball();
  QuadratureSpec s = spec;
  if (meas.n == 1) s = adapt_for_mobius(spec, norm(z), f.degree() + i);

  IntegralResult C = integrate([&](const Point& u) { return complexd(weight(u)); }, ball,
                               meas, s);
  IntegralResult B = integrate(
      [&](const Point& u) { return f.eval(mobius_map(z, u)) * weight(u); }, ball, meas, s);
  const complexd c = B.value / C.value;
  IntegralResult A = integrate(
      [&](const Point& u) {
        const complexd d = f.eval(mobius_map(z, u)) - c;
        return complexd(std::norm(d) * weight(u));
      },
      ball, meas, s);
  return std::sqrt(clamp_mo_sq(A.value.real(), std::norm(c)));
}

double mo_zbar_sq_oracle(double t) {
  if (!(t >= 0.0 && t < 1.0)) throw std::domain_error("mo_zbar_sq_oracle: t in [0,1)");
  if (t < 1e-3) {
    // (1-t)^2 sum_{k>=0} t^k/(k+2)
    double s = 0.0, tk = 1.0;
    for (int k = 0; k <= 8; ++k, tk *= t) s += tk / (k + 2.0);
    return (1.0 - t) * (1.0 - t) * s;
  }
  return (1.0 - t) * (1.0 - t) * (-(t + std::log1p(-t))) / (t * t);
}

// ----------------------------------------------------------- cell statistics

CellStats cell_statistics(const Symbol& f, const Region& E, const WeightedMeasure& meas,
                          const QuadratureSpec& spec) {
  require_valid(meas);
  complexd mass, m1;
  double v2;
  if (E.kind() == Region::Kind::Boxes) {
    mass = symbol_box_integral(Symbol::constant(1, 1.0), E.boxes(), meas);
    if (!(mass.real() > 0.0))
      throw std::domain_error("cell_statistics: region has zero measure");
    m1 = symbol_box_integral(f, E.boxes(), meas) / mass.real();
    Symbol g = f - Symbol::constant(1, m1);
    v2 = symbol_box_integral(g * g.conj(), E.boxes(), meas).real() / mass.real();
  } else {
    auto one = [](const Point&) { return complexd(1.0); };
    mass = integrate(one, E, meas, spec).value;
    if (!(mass.real() > 1e-12))
      throw std::domain_error("cell_statistics: region has zero or tiny measure");
    m1 = integrate([&](const Point& w) { return f.eval(w); }, E, meas, spec).value /
         mass.real();
    Symbol g = f - Symbol::constant(meas.n, m1);
    Symbol g2 = g * g.conj();
    v2 = integrate([&](const Point& w) { return g2.eval(w); }, E, meas, spec).value.real() /
         mass.real();
  }
  const double scale = std::norm(m1);
  return {m1, std::sqrt(clamp_mo_sq(v2, scale)), mass.real()};
}

// ------------------------------------------------------------- floor check

FloorCheck mo_floor_check(const Symbol& f, const WeightedMeasure& meas, const Point& z,
                          const QuadratureSpec& spec) {
  require_interior(z, "mo_floor_check");
  const double m = order_m(meas);
  const double lhs = mean_oscillation(f, meas, z, spec);

  // inf_alpha ||f - alpha||_{L^2(dv_gamma)} is attained at the global mean.
  const complexd alpha = ball_integral(f, meas);
  Symbol g = f - Symbol::constant(meas.n, alpha);
  const double dist = std::sqrt(std::max(0.0, ball_integral(g * g.conj(), meas).real()));

  const double rhs = std::pow(2.0, -m) * std::pow(1.0 - norm_sq(z), 0.5 * m) * dist;
  return {lhs, rhs, lhs - rhs};
}

}  // namespace bergman
