#include "bergman/quadrature.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace bergman {

OrthoRecurrence jacobi_recurrence01(double gamma, double m, int count) {
  if (gamma <= -1.0 || m <= -1.0) throw std::domain_error("jacobi_recurrence01: exponents must be > -1");
  if (count < 1) throw std::invalid_argument("jacobi_recurrence01: count must be >= 1");
  // Jacobi weight (1-x)^al (1+x)^be on [-1,1] with al = gamma, be = m,
  // mapped by u = (1+x)/2; monic transform a -> (A+1)/2, b -> B/4.
  const double al = gamma, be = m;
  OrthoRecurrence rec;
  rec.a.resize(count);
  rec.b.resize(count);
  const double mu0 =
      std::exp(std::lgamma(be + 1.0) + std::lgamma(al + 1.0) - std::lgamma(al + be + 2.0));
  rec.b[0] = mu0;  // int_0^1 u^m (1-u)^gamma du
  for (int k = 0; k < count; ++k) {
    double A;
    if (k == 0) {
      A = (be - al) / (al + be + 2.0);
    } else {
      const double s = 2.0 * k + al + be;
      A = (be * be - al * al) / (s * (s + 2.0));
    }
    rec.a[k] = (A + 1.0) / 2.0;
    if (k >= 1) {
      double B;
      if (k == 1) {
        B = 4.0 * (1.0 + al) * (1.0 + be) / ((2.0 + al + be) * (2.0 + al + be) * (3.0 + al + be));
      } else {
        const double s = 2.0 * k + al + be;
        B = 4.0 * k * (k + al) * (k + be) * (k + al + be) / (s * s * (s * s - 1.0));
      }
      rec.b[k] = B / 4.0;
    }
  }
  return rec;
}

Rule1D gauss_rule(const OrthoRecurrence& rec, int nodes) {
  if (nodes < 1 || nodes > (int)rec.a.size())
    throw std::invalid_argument("gauss_rule: node count exceeds recurrence length");
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(nodes, nodes);
  for (int k = 0; k < nodes; ++k) {
    J(k, k) = rec.a[k];
    if (k >= 1) {
      const double off = std::sqrt(rec.b[k]);
      J(k, k - 1) = off;
      J(k - 1, k) = off;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  Rule1D rule;
  rule.x.resize(nodes);
  rule.w.resize(nodes);
  for (int i = 0; i < nodes; ++i) {
    rule.x[i] = es.eigenvalues()(i);
    const double v0 = es.eigenvectors()(0, i);
    rule.w[i] = rec.b[0] * v0 * v0;
  }
  return rule;
}

Rule1D gauss_legendre(int nodes, double a, double b) {
  static thread_local std::vector<Rule1D> cache;  // unit-interval rules by node count
  if (nodes < 1) throw std::invalid_argument("gauss_legendre: nodes must be >= 1");
  if ((int)cache.size() <= nodes) cache.resize(nodes + 1);
  if (cache[nodes].x.empty())
    cache[nodes] = gauss_rule(jacobi_recurrence01(0.0, 0.0, nodes), nodes);
  Rule1D out = cache[nodes];
  const double len = b - a;
  for (int i = 0; i < nodes; ++i) {
    out.x[i] = a + len * out.x[i];
    out.w[i] *= len;
  }
  return out;
}

void eval_orthonormal(const OrthoRecurrence& rec, int maxdeg, double u, double* out) {
  if (maxdeg + 1 > (int)rec.a.size())
    throw std::invalid_argument("eval_orthonormal: degree exceeds recurrence length");
  // sqrt(b_{k+1}) phi_{k+1} = (u - a_k) phi_k - sqrt(b_k) phi_{k-1}
  double prev = 0.0;
  double cur = 1.0 / std::sqrt(rec.b[0]);
  out[0] = cur;
  for (int k = 0; k < maxdeg; ++k) {
    const double sb1 = std::sqrt(rec.b[k + 1]);
    const double sb0 = (k == 0) ? 0.0 : std::sqrt(rec.b[k]);
    const double next = ((u - rec.a[k]) * cur - sb0 * prev) / sb1;
    prev = cur;
    cur = next;
    out[k + 1] = cur;
  }
}

}  // namespace bergman
