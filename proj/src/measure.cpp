#include "bergman/measure.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <random>
#include <stdexcept>

namespace bergman {

void require_valid(const WeightedMeasure& meas) {
  if (meas.n < 1) throw std::domain_error("WeightedMeasure: n must be >= 1");
  if (!(meas.gamma > -1.0)) throw std::domain_error("WeightedMeasure: gamma must be > -1");
}

double normalizing_constant(const WeightedMeasure& meas) {
  require_valid(meas);
  return std::exp(std::lgamma(meas.n + 1.0 + meas.gamma) - meas.n * std::log(M_PI) -
                  std::lgamma(meas.gamma + 1.0));
}

double moment(const WeightedMeasure& meas, int k) {
  require_valid(meas);
  if (k < 0) throw std::domain_error("moment: k must be >= 0");
  const double n = meas.n, g = meas.gamma;
  return std::exp(std::lgamma(n + k) + std::lgamma(n + 1.0 + g) - std::lgamma(n) -
                  std::lgamma(n + k + 1.0 + g));
}

namespace {

double monomial_l2_diag(const WeightedMeasure& meas, const MultiIndex& e) {
  double acc = std::lgamma(meas.n + 1.0 + meas.gamma);
  long tot = 0;
  for (int ei : e) {
    acc += std::lgamma(ei + 1.0);
    tot += ei;
  }
  acc -= std::lgamma(meas.n + 1.0 + meas.gamma + tot);
  return std::exp(acc);
}

}  // namespace

double monomial_inner(const WeightedMeasure& meas, const MultiIndex& a,
                      const MultiIndex& b, const MultiIndex& c, const MultiIndex& d) {
  require_valid(meas);
  const size_t n = meas.n;
  if (a.size() != n || b.size() != n || c.size() != n || d.size() != n)
    throw std::invalid_argument("monomial_inner: index dimension mismatch");
  MultiIndex e(n);
  for (size_t i = 0; i < n; ++i) {
    if (a[i] + d[i] != b[i] + c[i]) return 0.0;
    e[i] = a[i] + d[i];
  }
  return monomial_l2_diag(meas, e);
}

double monomial_inner1(const WeightedMeasure& meas, int a, int b, int c, int d) {
  return monomial_inner(meas, {a}, {b}, {c}, {d});
}

complexd ball_integral(const Symbol& f, const WeightedMeasure& meas) {
  require_valid(meas);
  if (f.dim() != meas.n) throw std::invalid_argument("ball_integral: dimension mismatch");
  complexd s = 0.0;
  for (const auto& t : f.terms()) {
    bool diag = true;
    for (size_t i = 0; i < t.a.size(); ++i)
      if (t.a[i] != t.b[i]) {
        diag = false;
        break;
      }
    if (diag) s += t.coeff * monomial_l2_diag(meas, t.a);
  }
  return s;
}

complexd symbol_inner(const Symbol& f, const Symbol& g, const WeightedMeasure& meas) {
  return ball_integral(f * g.conj(), meas);
}

// ---------------------------------------------------------------- Region

Region Region::whole_ball() { return truncated_ball(0.0); }

Region Region::truncated_ball(double eps) {
  if (eps < 0.0 || eps >= 1.0) throw std::domain_error("Region: eps must lie in [0, 1)");
  Region r;
  r.kind_ = Kind::TruncatedBall;
  r.eps_ = eps;
  return r;
}

Region Region::polar_boxes(std::vector<PolarBox> boxes) {
  for (const auto& b : boxes) {
    if (!(0.0 <= b.u1 && b.u1 <= b.u2 && b.u2 <= 1.0))
      throw std::domain_error("Region: invalid box radial range");
    if (!(b.th1 <= b.th2 && b.th2 - b.th1 <= 2.0 * M_PI + 1e-12))
      throw std::domain_error("Region: invalid box angular range");
  }
  Region r;
  r.kind_ = Kind::Boxes;
  r.boxes_ = std::move(boxes);
  return r;
}

Region Region::membership(std::function<bool(const Point&)> member, double eps) {
  Region r;
  r.kind_ = Kind::Membership;
  r.member_ = std::move(member);
  r.eps_ = eps;
  return r;
}

Region Region::complement(Region inner, double eps) {
  Region r;
  r.kind_ = Kind::Complement;
  r.eps_ = eps;
  r.inner_ = std::make_shared<Region>(std::move(inner));
  return r;
}

namespace {

bool angle_in(double th, double th1, double th2) {
  const double two_pi = 2.0 * M_PI;
  double t = std::fmod(th - th1, two_pi);
  if (t < 0) t += two_pi;
  return t <= th2 - th1 + 1e-15;
}

}  // namespace

bool Region::contains1(complexd z) const {
  const double u = std::norm(z);
  switch (kind_) {
    case Kind::TruncatedBall: {
      const double rmax = 1.0 - eps_;
      return u <= rmax * rmax;
    }
    case Kind::Boxes: {
      const double th = std::arg(z);
      for (const auto& b : boxes_)
        if (u >= b.u1 && u < b.u2 && angle_in(th, b.th1, b.th2)) return true;
      return false;
    }
    case Kind::Membership:
      return member_ && u <= (1.0 - eps_) * (1.0 - eps_) && member_(Point{z});
    case Kind::Complement: {
      const double rmax = 1.0 - eps_;
      return u <= rmax * rmax && !inner_->contains1(z);
    }
  }
  return false;
}

bool Region::contains(const Point& z) const {
  if (z.size() == 1) return contains1(z[0]);
  const double u = norm_sq(z);
  switch (kind_) {
    case Kind::TruncatedBall: {
      const double rmax = 1.0 - eps_;
      return u <= rmax * rmax;
    }
    case Kind::Boxes:
      throw std::domain_error("Region: polar boxes are n = 1 only");
    case Kind::Membership:
      return member_ && u <= (1.0 - eps_) * (1.0 - eps_) && member_(z);
    case Kind::Complement: {
      const double rmax = 1.0 - eps_;
      return u <= rmax * rmax && !inner_->contains(z);
    }
  }
  return false;
}

// ---------------------------------------------------- deterministic n = 1

namespace {

complexd rule_truncated_ball(const std::function<complexd(complexd)>& f, double gamma,
                             double eps, int radial_order, int angular_order) {
  const int m = radial_order + 1;
  const int K = std::max(4, angular_order);
  complexd acc = 0.0;
  if (eps == 0.0) {
    // weight (1-u)^gamma absorbed by the Gauss-Jacobi rule
    Rule1D rule = gauss_rule(jacobi_recurrence01(gamma, 0.0, m), m);
    for (int i = 0; i < m; ++i) {
      const double r = std::sqrt(rule.x[i]);
      complexd ring = 0.0;
      for (int j = 0; j < K; ++j) {
        const double th = 2.0 * M_PI * j / K;
        ring += f(complexd(r * std::cos(th), r * std::sin(th)));
      }
      acc += rule.w[i] * ring;
    }
  } else {
    const double umax = (1.0 - eps) * (1.0 - eps);
    Rule1D rule = gauss_legendre(2 * m, 0.0, umax);
    for (size_t i = 0; i < rule.x.size(); ++i) {
      const double u = rule.x[i];
      const double r = std::sqrt(u);
      complexd ring = 0.0;
      for (int j = 0; j < K; ++j) {
        const double th = 2.0 * M_PI * j / K;
        ring += f(complexd(r * std::cos(th), r * std::sin(th)));
      }
      acc += rule.w[i] * std::pow(1.0 - u, gamma) * ring;
    }
  }
  return (gamma + 1.0) / K * acc;
}

complexd rule_boxes(const std::function<complexd(complexd)>& f, double gamma,
                    const std::vector<PolarBox>& boxes, int order) {
  const int m = std::clamp(order, 6, 48);
  complexd acc = 0.0;
  for (const auto& b : boxes) {
    if (b.u2 <= b.u1 || b.th2 <= b.th1) continue;
    Rule1D ru = gauss_legendre(m, b.u1, b.u2);
    Rule1D rt = gauss_legendre(m, b.th1, b.th2);
    for (int i = 0; i < m; ++i) {
      const double u = ru.x[i];
      const double r = std::sqrt(u);
      const double wu = ru.w[i] * std::pow(1.0 - u, gamma);
      complexd inner = 0.0;
      for (int j = 0; j < m; ++j)
        inner += rt.w[j] * f(complexd(r * std::cos(rt.x[j]), r * std::sin(rt.x[j])));
      acc += wu * inner;
    }
  }
  return (gamma + 1.0) / (2.0 * M_PI) * acc;
}

complexd run_deterministic(const std::function<complexd(complexd)>& f,
                           const Region& region, double gamma, int radial_order,
                           int angular_order) {
  switch (region.kind()) {
    case Region::Kind::TruncatedBall:
      return rule_truncated_ball(f, gamma, region.eps(), radial_order, angular_order);
    case Region::Kind::Boxes:
      return rule_boxes(f, gamma, region.boxes(), radial_order / 3 + 6);
    case Region::Kind::Complement:
      return rule_truncated_ball(f, gamma, region.eps(), radial_order, angular_order) -
             run_deterministic(f, region.inner(), gamma, radial_order, angular_order);
    case Region::Kind::Membership:
      throw std::domain_error("integrate1: membership regions need polar boxes at n = 1");
  }
  return 0.0;
}

}  // namespace

IntegralResult integrate1(const std::function<complexd(complexd)>& f, const Region& region,
                          const WeightedMeasure& meas, const QuadratureSpec& spec) {
  require_valid(meas);
  if (meas.n != 1) throw std::domain_error("integrate1: requires n = 1");
  const complexd coarse =
      run_deterministic(f, region, meas.gamma, spec.radial_order, spec.angular_order);
  const complexd fine = run_deterministic(f, region, meas.gamma, spec.radial_order + 8,
                                          2 * spec.angular_order + 1);
  return {fine, std::abs(fine - coarse)};
}

// ------------------------------------------------------- Monte Carlo n >= 2

namespace {

struct BallSampler {
  std::mt19937_64 rng;
  std::gamma_distribution<double> gs;   // shape n
  std::gamma_distribution<double> gg;   // shape gamma + 1
  std::normal_distribution<double> nd;
  int n;

  BallSampler(int n_, double gamma, std::uint64_t seed)
      : rng(seed), gs(double(n_), 1.0), gg(gamma + 1.0, 1.0), nd(0.0, 1.0), n(n_) {}

  // One draw from dv_gamma: u = |z|^2 ~ Beta(n, gamma+1), direction uniform.
  Point draw() {
    const double x = gs(rng), y = gg(rng);
    const double u = x / (x + y);
    Point z(n);
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      z[i] = complexd(nd(rng), nd(rng));
      s += std::norm(z[i]);
    }
    const double scale = std::sqrt(u / s);
    for (int i = 0; i < n; ++i) z[i] *= scale;
    return z;
  }
};

}  // namespace

IntegralResult integrate(const std::function<complexd(const Point&)>& f,
                         const Region& region, const WeightedMeasure& meas,
                         const QuadratureSpec& spec) {
  require_valid(meas);
  if (meas.n == 1) {
    auto g = [&f](complexd z) { return f(Point{z}); };
    return integrate1(g, region, meas, spec);
  }
  BallSampler sampler(meas.n, meas.gamma, spec.seed);
  const long M = std::max(1000L, spec.mc_samples);
  complexd sum = 0.0;
  double sum2 = 0.0;
  for (long i = 0; i < M; ++i) {
    Point z = sampler.draw();
    if (!region.contains(z)) continue;
    const complexd v = f(z);
    sum += v;
    sum2 += std::norm(v);
  }
  const complexd mean = sum / double(M);
  const double var = std::max(0.0, sum2 / M - std::norm(mean));
  return {mean, 1.96 * std::sqrt(var / M)};
}

// ------------------------------------------------------------- box closed forms

double radial_box_integral(double s, double gamma, double u1, double u2) {
  if (u1 > u2) throw std::domain_error("radial_box_integral: u1 > u2");
  const double hi = (u2 >= 1.0) ? boost::math::beta(s + 1.0, gamma + 1.0)
                                : boost::math::beta(s + 1.0, gamma + 1.0, u2);
  const double lo = (u1 <= 0.0) ? 0.0 : boost::math::beta(s + 1.0, gamma + 1.0, u1);
  return 0.5 * (hi - lo);
}

namespace {

complexd angular_factor(int q, double th1, double th2) {
  if (q == 0) return th2 - th1;
  const complexd iq(0.0, double(q));
  return (std::exp(iq * th2) - std::exp(iq * th1)) / iq;
}

}  // namespace

complexd symbol_box_integral(const Symbol& f, const std::vector<PolarBox>& boxes,
                             const WeightedMeasure& meas) {
  require_valid(meas);
  if (meas.n != 1) throw std::domain_error("symbol_box_integral: requires n = 1");
  const double c = (meas.gamma + 1.0) / M_PI;
  complexd acc = 0.0;
  for (const auto& t : f.terms()) {
    const int a = t.a[0], b = t.b[0];
    const double s = 0.5 * (a + b);
    const int q = a - b;
    for (const auto& box : boxes) {
      acc += t.coeff * c * radial_box_integral(s, meas.gamma, box.u1, box.u2) *
             angular_factor(q, box.th1, box.th2);
    }
  }
  return acc;
}

// ----------------------------------------------------------------- tau

double tau_measure(const Region& region, const WeightedMeasure& meas,
                   const QuadratureSpec& spec) {
  require_valid(meas);
  const int n = meas.n;
  switch (region.kind()) {
    case Region::Kind::TruncatedBall: {
      if (region.eps() <= 0.0) return INFINITY;
      const double R = 1.0 - region.eps();
      const double u = R * R;
      const double vn = std::exp(n * std::log(M_PI) - std::lgamma(n + 1.0));
      return vn * std::pow(u / (1.0 - u), n);
    }
    case Region::Kind::Boxes: {
      if (n != 1) throw std::domain_error("tau_measure: boxes are n = 1 only");
      double acc = 0.0;
      for (const auto& b : region.boxes()) {
        if (b.u2 >= 1.0) return INFINITY;
        acc += 0.5 * (b.th2 - b.th1) * (1.0 / (1.0 - b.u2) - 1.0 / (1.0 - b.u1));
      }
      return acc;
    }
    case Region::Kind::Complement:
      return tau_measure(Region::truncated_ball(region.eps()), meas, spec) -
             tau_measure(region.inner(), meas, spec);
    case Region::Kind::Membership: {
      if (!(region.eps() > 0.0))
        throw std::domain_error("tau_measure: membership region must be bounded away from the boundary");
      // dtau = (1-u)^{-n-1-gamma} / c_gamma dv_gamma: importance-sample dv_gamma.
      const double cg = normalizing_constant(meas);
      BallSampler sampler(n, meas.gamma, spec.seed);
      const long M = std::max(1000L, spec.mc_samples);
      double acc = 0.0;
      for (long i = 0; i < M; ++i) {
        Point z = sampler.draw();
        if (!region.contains(z)) continue;
        acc += std::pow(1.0 - norm_sq(z), -n - 1.0 - meas.gamma);
      }
      return acc / (cg * M);
    }
  }
  return 0.0;
}

}  // namespace bergman
