#include "bergman/geometry.hpp"

#include <cmath>

namespace bergman {

double clamp_radicand(double x) {
  if (x >= 0.0) return x;
  if (x >= -kRadicandTol) return 0.0;
  throw std::domain_error("radicand below -1e-12 in sqrt of a nonnegative quantity");
}

complexd herm_dot(const Point& z, const Point& w) {
  if (z.size() != w.size()) throw std::invalid_argument("herm_dot: dimension mismatch");
  complexd s = 0.0;
  for (size_t i = 0; i < z.size(); ++i) s += z[i] * std::conj(w[i]);
  return s;
}

double norm_sq(const Point& z) {
  double s = 0.0;
  for (const auto& zi : z) s += std::norm(zi);
  return s;
}

double norm(const Point& z) { return std::sqrt(norm_sq(z)); }

bool is_interior(const Point& z) { return norm_sq(z) < (1.0 - kBoundaryTol) * (1.0 - kBoundaryTol); }

void require_interior(const Point& z, const char* where) {
  if (z.empty()) throw std::invalid_argument(std::string(where) + ": empty point");
  if (!is_interior(z)) throw std::domain_error(std::string(where) + ": point not in the open ball");
}

Point mobius_map(const Point& a, const Point& z) {
  require_interior(a, "mobius_map");
  require_interior(z, "mobius_map");
  const double a2 = norm_sq(a);
  if (a2 == 0.0) {
    Point r(z.size());
    for (size_t i = 0; i < z.size(); ++i) r[i] = -z[i];
    return r;
  }
  const complexd za = herm_dot(z, a);
  const double s = std::sqrt(clamp_radicand(1.0 - a2));
  const complexd denom = 1.0 - za;
  const complexd proj = za / a2;  // P_a z = proj * a
  Point r(z.size());
  for (size_t i = 0; i < z.size(); ++i) {
    const complexd pz = proj * a[i];
    const complexd qz = z[i] - pz;
    r[i] = (a[i] - pz - s * qz) / denom;
  }
  return r;
}

namespace {

// d = atanh(t) from q = 1 - t^2, written so that q near 0 (boundary) and
// q near 1 (coincident points) are both well-conditioned.
double distance_from_q(double q) {
  const double t = std::sqrt(clamp_radicand(1.0 - q));
  if (q <= 0.0) throw std::domain_error("bergman_distance: boundary point");
  return 0.5 * std::log((1.0 + t) * (1.0 + t) / q);
}

}  // namespace

double bergman_distance(const Point& z, const Point& w) {
  require_interior(z, "bergman_distance");
  require_interior(w, "bergman_distance");
  const double q =
      (1.0 - norm_sq(z)) * (1.0 - norm_sq(w)) / std::norm(1.0 - herm_dot(z, w));
  return distance_from_q(std::min(q, 1.0));
}

double bergman_distance1(complexd z, complexd w) {
  const double q = (1.0 - std::norm(z)) * (1.0 - std::norm(w)) /
                   std::norm(1.0 - z * std::conj(w));
  return distance_from_q(std::min(q, 1.0));
}

double nonisotropic_distance(const Point& u, const Point& v) {
  return std::sqrt(std::abs(1.0 - herm_dot(u, v)));
}

Point radial_project(const Point& z, double r) {
  if (r < 0.0) throw std::domain_error("radial_project: negative radius");
  const double nz = norm(z);
  if (nz == 0.0) throw std::domain_error("radial_project: direction undefined at 0");
  const double scale = std::tanh(r) / nz;
  Point p(z.size());
  for (size_t i = 0; i < z.size(); ++i) p[i] = scale * z[i];
  return p;
}

bool carleson_contains(const Point& apex, double rho, const Point& w) {
  require_interior(apex, "carleson_contains");
  const double nz = norm(apex);
  if (nz == 0.0) throw std::domain_error("carleson_contains: apex direction undefined at 0");
  if (rho <= 0.0) throw std::domain_error("carleson_contains: aperture must be positive");
  complexd s = 0.0;
  for (size_t i = 0; i < apex.size(); ++i) s += w[i] * std::conj(apex[i] / nz);
  return std::abs(1.0 - s) <= rho * (1.0 - nz);
}

namespace {

// Nodes/weights of N-point Gauss-Legendre on [0, 1] (Newton on P_N).
void gauss_legendre01(int N, std::vector<double>& x, std::vector<double>& w) {
  x.resize(N);
  w.resize(N);
  for (int i = 0; i < N; ++i) {
    double t = std::cos(M_PI * (i + 0.75) / (N + 0.5));
    double p0, p1;
    for (int it = 0; it < 100; ++it) {
      p0 = 1.0;
      p1 = t;
      for (int k = 2; k <= N; ++k) {
        const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double dp = N * (t * p1 - p0) / (t * t - 1.0);
      const double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    p0 = 1.0;
    p1 = t;
    for (int k = 2; k <= N; ++k) {
      const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    const double dp = N * (t * p1 - p0) / (t * t - 1.0);
    x[i] = 0.5 * (1.0 + t);
    w[i] = 1.0 / ((1.0 - t * t) * dp * dp);
  }
}

// L(r) for n >= 2 via the bounded form obtained from the first-coordinate
// marginal of sigma and the scaling u -> r^2 t:
//   L(r) = ((n-1)/pi) Int_{|t|<1, 2 Re t > r^2 |t|^2}
//          (2 Re t - r^2 |t|^2)^{n-2} dA(t),
// in polar coordinates t = p e^{i theta}.
double cap_L_quad(int n, double r, int order) {
  std::vector<double> xp, wp, xt, wt;
  gauss_legendre01(order, xp, wp);
  gauss_legendre01(order, xt, wt);
  const double r2 = r * r;
  double total = 0.0;
  for (int i = 0; i < order; ++i) {
    const double p = xp[i];
    const double c = std::min(1.0, r2 * p / 2.0);
    const double thm = std::acos(c);
    double inner = 0.0;
    for (int j = 0; j < order; ++j) {
      const double th = thm * xt[j];
      const double g = 2.0 * p * std::cos(th) - r2 * p * p;
      inner += wt[j] * (n == 2 ? 1.0 : std::pow(g, n - 2));
    }
    total += wp[i] * p * 2.0 * thm * inner;
  }
  return (n - 1) / M_PI * total;
}

}  // namespace

double cap_L(int n, double r, double* abs_err) {
  if (n < 1) throw std::domain_error("cap_L: dimension must be >= 1");
  if (!(r > 0.0) || r > std::sqrt(2.0) * (1.0 + 1e-12))
    throw std::domain_error("cap_L: radius must lie in (0, sqrt(2)]");
  r = std::min(r, std::sqrt(2.0));
  if (n == 1) {
    if (abs_err) *abs_err = 0.0;
    const double x = std::min(r * r / 2.0, 1.0);
    if (x < 1e-8) return (1.0 + x * x / 6.0) / M_PI;
    return (2.0 / M_PI) * std::asin(x) / (r * r);
  }
  const double coarse = cap_L_quad(n, r, 64);
  const double fine = cap_L_quad(n, r, 128);
  if (abs_err) *abs_err = std::abs(fine - coarse);
  return fine;
}

double cap_sigma(int n, double r) {
  double L = cap_L(n, r);
  return L * std::pow(r, 2 * n);
}

}  // namespace bergman
